use std::path::{Path, PathBuf};

use agler_core::agler::{
    closed_form_product, extremal_pair_with, sample_points, solve_constraints, AglerPairJson, ExtremalOptions,
    Flavor,
};
use agler_core::analysis::{
    block_commutator_spectra, eigen_multiplicities, eigenvalues, point_spectrum_check, rank_ladder, rank_law_harness,
    BlockSpectra, Cluster, PointSpectrumReport, RankOptions, RankReport,
};
use agler_core::corpus::corpus;
use agler_core::innerfn::{torus_modulus_deviation, verify_inner, InnerFunction, InnerSpec, SpecTarget};
use agler_core::poly2::Var;
use agler_core::reducing::{reducing_harness_with, ReducingOptions, ReducingReport, ReducingVerdict};
use agler_core::shiftop::{agler_split, build_frame, compress_commutator, compress_shift};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

pub const INNER_TOL: f64 = 1e-10;

pub fn read_spec(path: &Path) -> Result<InnerSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(path.to_path_buf(), e.to_string()))
}

pub fn read_inner(path: &Path) -> Result<InnerFunction<f64>, CliError> {
    Ok(read_spec(path)?.build_inner::<f64>()?)
}

fn rank_options(cfg: &RunConfig) -> RankOptions {
    RankOptions {
        ladder: cfg.ladder.clone(),
        tol: cfg.tolerances.rank_tol,
        grid_n: cfg.grid_n,
        drop_tol: cfg.tolerances.drop_tol,
    }
}

fn extremal_options(cfg: &RunConfig) -> ExtremalOptions {
    ExtremalOptions {
        seed: cfg.seed,
        ..ExtremalOptions::default()
    }
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub kind: &'static str,
    pub grid_n: usize,
    pub deviation: Option<f64>,
    pub tol: f64,
    pub pass: bool,
}

pub fn verify_inner_cmd(spec: &Path, cfg: &RunConfig) -> Result<(VerifyReport, bool), CliError> {
    let n = cfg.grid_n;
    let (kind, deviation) = match read_spec(spec)?.build::<f64>()? {
        SpecTarget::Inner(f) => (
            if f.as_product().is_some() { "product" } else { "rational" },
            verify_inner(&f, n),
        ),
        SpecTarget::Quotient(r) => ("quotient", torus_modulus_deviation(n, |z1, z2| r.evaluate(z1, z2))),
    };
    let pass = deviation <= INNER_TOL;
    let report = VerifyReport {
        kind,
        grid_n: n,
        deviation: deviation.is_finite().then_some(deviation),
        tol: INNER_TOL,
        pass,
    };
    Ok((report, pass))
}

#[derive(Debug, Serialize)]
pub struct DecomposeReport {
    pub degree: [usize; 2],
    pub method: &'static str,
    pub pair: AglerPairJson,
    pub kernel_ranks: [usize; 2],
    /// Both Gram matrices PSD to `psd_tol · λ_max`.
    pub psd: bool,
    pub identity_residual: f64,
}

pub fn agler_decompose_cmd(
    spec: &Path,
    flavor: Flavor,
    force_solver: bool,
    cfg: &RunConfig,
) -> Result<DecomposeReport, CliError> {
    let f = read_inner(spec)?;
    let theta = f.to_rational();
    let (pair, method) = match (f.as_product(), force_solver) {
        (Some(p), false) => {
            let (max, min) = closed_form_product(p);
            let pair = match flavor {
                Flavor::Min1Max2 => min,
                _ => max,
            };
            (pair, "closed_form")
        }
        _ => {
            let sys = solve_constraints(&theta)?;
            (extremal_pair_with(&sys, flavor, &extremal_options(cfg))?, "solver")
        }
    };
    let residual = sample_points(cfg.seed, 200, 0.95)
        .chunks(2)
        .map(|w| pair.identity_residual(&theta, w[0], w[1]))
        .fold(0.0f64, f64::max);
    let (m, n) = theta.degree();
    Ok(DecomposeReport {
        degree: [m, n],
        method,
        kernel_ranks: [pair.k1.rank(1e-8), pair.k2.rank(1e-8)],
        psd: pair.k1.is_psd(cfg.tolerances.psd_tol) && pair.k2.is_psd(cfg.tolerances.psd_tol),
        identity_residual: residual,
        pair: pair.to_json(),
    })
}

pub fn commutator_rank_cmd(spec: &Path, var: Var, cfg: &RunConfig) -> Result<RankReport, CliError> {
    let f = read_inner(spec)?;
    Ok(rank_ladder(&f, var, &rank_options(cfg))?)
}

#[derive(Debug, Serialize)]
pub struct SpectrumReport {
    pub var: usize,
    pub truncation: usize,
    pub frame_dim: usize,
    /// Eigenvalues of the compressed shift, sorted by real then imaginary part.
    pub shift_eigenvalues: Vec<[f64; 2]>,
    pub commutator_clusters: Vec<Cluster>,
    /// Products only, `z1` only: spectra on the two parts of the Agler split.
    pub blocks: Option<BlockSpectra>,
    pub point_spectrum: Option<PointSpectrumReport>,
}

pub fn spectrum_cmd(spec: &Path, var: Var, d: usize, cfg: &RunConfig) -> Result<SpectrumReport, CliError> {
    let f = read_inner(spec)?;
    let frame = build_frame(&f, d, d, cfg.grid_n, cfg.tolerances.drop_tol)?;
    let s = compress_shift(&frame, var)?;
    let mut ev: Vec<[f64; 2]> = eigenvalues(&s.entries).iter().map(|z| [z.re, z.im]).collect();
    ev.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let cm = compress_commutator(&frame, var)?;
    let clusters = eigen_multiplicities(&cm.entries, cfg.tolerances.cluster_tol)?;
    let (blocks, point) = match (f.as_product(), var) {
        (Some(p), Var::Z1) => {
            let (pair, _) = closed_form_product(p);
            let split = agler_split(&f, &pair, d, cfg.grid_n)?;
            let blocks = block_commutator_spectra(&split, cfg.tolerances.cluster_tol)?;
            let point = if p.phi.degree() > 0 {
                Some(point_spectrum_check(p, d, cfg.grid_n)?)
            } else {
                None
            };
            (Some(blocks), point)
        }
        _ => (None, None),
    };
    Ok(SpectrumReport {
        var: var.index() + 1,
        truncation: d,
        frame_dim: frame.dim(),
        shift_eigenvalues: ev,
        commutator_clusters: clusters,
        blocks,
        point_spectrum: point,
    })
}

fn reducing_options(cfg: &RunConfig) -> ReducingOptions {
    ReducingOptions {
        seed: cfg.seed,
        grid_n: cfg.grid_n,
        ..ReducingOptions::default()
    }
}

pub fn reducing_test_cmd(spec: &Path, cfg: &RunConfig) -> Result<ReducingReport, CliError> {
    let f = read_inner(spec)?;
    Ok(reducing_harness_with(&f.to_rational(), &reducing_options(cfg))?)
}

#[derive(Debug, Serialize)]
pub struct SuiteRow {
    pub name: String,
    pub degree: [usize; 2],
    pub rank_verdict: Option<String>,
    pub rank: Option<usize>,
    pub sampling_rank: Option<usize>,
    pub rank_law: String,
    pub reducing: String,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct SuiteReport {
    pub rows: Vec<SuiteRow>,
    pub passed: usize,
    pub total: usize,
}

/// Specs from `*.json` files in `dir`, sorted by file name, or the bundled
/// corpus.
pub fn load_corpus(dir: Option<&Path>) -> Result<Vec<(String, InnerFunction<f64>)>, CliError> {
    let Some(dir) = dir else {
        return Ok(corpus().into_iter().map(|e| (e.name.to_string(), e.function)).collect());
    };
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::Io(dir.to_path_buf(), e.to_string()))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Config(format!("no .json specs in {}", dir.display())));
    }
    paths
        .iter()
        .map(|p| {
            let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok((name, read_inner(p)?))
        })
        .collect()
}

fn suite_row(name: String, f: &InnerFunction<f64>, cfg: &RunConfig) -> SuiteRow {
    let (m, n) = f.degree();
    let mut row = SuiteRow {
        name,
        degree: [m, n],
        rank_verdict: None,
        rank: None,
        sampling_rank: None,
        rank_law: String::new(),
        reducing: String::new(),
        pass: false,
    };
    let rank_ok = match rank_law_harness(f, &rank_options(cfg)) {
        Ok(r) => {
            row.rank_verdict = Some(r.ladder.verdict.name().to_string());
            row.rank = r.ladder.verdict.rank();
            row.sampling_rank = r.sampling_rank;
            match &r.verdict {
                agler_core::analysis::HarnessVerdict::Consistent => {
                    row.rank_law = "consistent".into();
                    true
                }
                agler_core::analysis::HarnessVerdict::Violation(msg) => {
                    row.rank_law = format!("violation: {msg}");
                    false
                }
            }
        }
        Err(e) => {
            row.rank_law = format!("error: {e}");
            false
        }
    };
    let reducing_ok = match reducing_harness_with(&f.to_rational(), &reducing_options(cfg)) {
        Ok(r) => {
            row.reducing = match r.verdict {
                ReducingVerdict::ReducingProduct => "reducing_product".into(),
                ReducingVerdict::NonReducing => "non_reducing".into(),
            };
            true
        }
        Err(e) => {
            row.reducing = format!("error: {e}");
            false
        }
    };
    row.pass = rank_ok && reducing_ok;
    row
}

pub fn corpus_check_cmd(dir: Option<&Path>, cfg: &RunConfig) -> Result<(SuiteReport, bool), CliError> {
    let rows: Vec<SuiteRow> = load_corpus(dir)?
        .into_iter()
        .map(|(name, f)| suite_row(name, &f, cfg))
        .collect();
    let passed = rows.iter().filter(|r| r.pass).count();
    let total = rows.len();
    Ok((SuiteReport { rows, passed, total }, passed == total))
}

/// `theta` of the bundled corpus as spec files.
pub fn export_corpus(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.to_path_buf(), e.to_string()))?;
    let mut out = Vec::new();
    for e in corpus() {
        let path = dir.join(format!("{}.json", e.name));
        let text = crate::output::to_json_string(&InnerSpec::from_inner(&e.function))?;
        std::fs::write(&path, text).map_err(|err| CliError::Io(path.clone(), err.to_string()))?;
        out.push(path);
    }
    Ok(out)
}
