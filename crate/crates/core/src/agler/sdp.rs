//! Log-barrier interior-point method for small dense linear matrix inequalities
//! `B_b(y) = B_b0 + Σ y_i A_bi ⪰ 0` over real parameters `y`.

use crate::error::{Error, Result};
use crate::linalg::{flatten_complex, hermitian_cholesky, hermitian_eigen, solve_affine, CMat, RMat, RVec};

#[derive(Clone, Debug)]
pub struct Block {
    pub offset: CMat,
    pub dirs: Vec<CMat>,
}

/// Affine Hermitian blocks in `dim` real parameters.
#[derive(Clone, Debug)]
pub struct Lmi {
    pub dim: usize,
    pub blocks: Vec<Block>,
}

/// An [`Lmi`] together with the affine map `y = origin + basis · z` back to the
/// parameters it was derived from.
#[derive(Clone, Debug)]
pub struct Reduced {
    pub lmi: Lmi,
    pub origin: RVec,
    pub basis: RMat,
}

impl Reduced {
    pub fn lift(&self, z: &RVec) -> RVec {
        &self.origin + &self.basis * z
    }
}

impl Lmi {
    pub fn eval(&self, y: &RVec) -> Vec<CMat> {
        self.blocks
            .iter()
            .map(|b| {
                let mut h = b.offset.clone();
                for (yi, a) in y.iter().zip(&b.dirs) {
                    h += a.scale(*yi);
                }
                h
            })
            .collect()
    }

    pub fn scale(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.offset.norm())
            .fold(1.0f64, f64::max)
    }

    /// Substitutes `y = y0 + n z`.
    pub fn restrict(&self, y0: &RVec, n: &RMat) -> Lmi {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let mut offset = b.offset.clone();
                for (yi, a) in y0.iter().zip(&b.dirs) {
                    offset += a.scale(*yi);
                }
                let dirs = (0..n.ncols())
                    .map(|k| {
                        let mut d = CMat::zeros(offset.nrows(), offset.ncols());
                        for (i, a) in b.dirs.iter().enumerate() {
                            let w = n[(i, k)];
                            if w != 0.0 {
                                d += a.scale(w);
                            }
                        }
                        d
                    })
                    .collect();
                Block { offset, dirs }
            })
            .collect();
        Lmi {
            dim: n.ncols(),
            blocks,
        }
    }

    /// Replaces each block by `V* B V`; blocks with an empty `V` are dropped.
    pub fn compress(&self, vs: &[CMat]) -> Lmi {
        let blocks = self
            .blocks
            .iter()
            .zip(vs)
            .filter(|(_, v)| v.ncols() > 0)
            .map(|(b, v)| {
                let vh = v.adjoint();
                Block {
                    offset: &vh * &b.offset * v,
                    dirs: b.dirs.iter().map(|a| &vh * a * v).collect(),
                }
            })
            .collect();
        Lmi {
            dim: self.dim,
            blocks,
        }
    }

    /// Linear equations `B_b(y) U_b = 0` for all blocks.
    fn annihilator_system(&self, us: &[CMat]) -> (RMat, RVec) {
        let mut rows: Vec<Vec<f64>> = vec![Vec::new(); self.dim];
        let mut rhs = Vec::new();
        for (b, u) in self.blocks.iter().zip(us) {
            if u.ncols() == 0 {
                continue;
            }
            rhs.extend(flatten_complex(&(&b.offset * u)).into_iter().map(|x| -x));
            for (i, a) in b.dirs.iter().enumerate() {
                rows[i].extend(flatten_complex(&(a * u)));
            }
        }
        let neq = rhs.len();
        let a = RMat::from_fn(neq, self.dim, |r, i| rows[i][r]);
        (a, RVec::from_vec(rhs))
    }
}

/// Cholesky factors of every block, or `None` if one is not positive definite.
fn factor(blocks: &[CMat]) -> Option<Vec<CMat>> {
    blocks
        .iter()
        .map(hermitian_cholesky)
        .collect()
}

fn log_det(ls: &[CMat]) -> f64 {
    ls.iter()
        .map(|l| (0..l.nrows()).map(|i| 2.0 * l[(i, i)].re.ln()).sum::<f64>())
        .sum()
}

fn barrier_value(lmi: &Lmi, obj: &RVec, y: &RVec, mu: f64) -> Option<f64> {
    let ls = factor(&lmi.eval(y))?;
    Some(obj.dot(y) / mu + log_det(&ls))
}

/// Newton centering for `max obj·y / mu + Σ log det B_b(y)` from a strictly
/// feasible `y`.
fn center(lmi: &Lmi, obj: &RVec, mut y: RVec, mu: f64) -> Result<RVec> {
    let d = lmi.dim;
    if d == 0 {
        return Ok(y);
    }
    for _ in 0..200 {
        let hs = lmi.eval(&y);
        let ls = factor(&hs).ok_or_else(|| Error::Solver("iterate left the cone".into()))?;
        let mut grad = obj / mu;
        let mut hess = RMat::zeros(d, d);
        for (b, l) in lmi.blocks.iter().zip(&ls) {
            // P_i = L⁻¹ A_i L⁻*
            let ps: Vec<CMat> = b
                .dirs
                .iter()
                .map(|a| {
                    let x = l.solve_lower_triangular(a).expect("nonsingular factor");
                    let xt = l
                        .solve_lower_triangular(&x.adjoint())
                        .expect("nonsingular factor");
                    xt.adjoint()
                })
                .collect();
            for i in 0..d {
                grad[i] += ps[i].trace().re;
                for j in 0..=i {
                    let t: f64 = ps[i]
                        .iter()
                        .zip(ps[j].iter())
                        .map(|(p, q)| (p * q.conj()).re)
                        .sum();
                    hess[(i, j)] += t;
                    if i != j {
                        hess[(j, i)] += t;
                    }
                }
            }
        }
        let step = match hess.clone().cholesky() {
            Some(ch) => ch.solve(&grad),
            None => {
                let reg = hess.clone() + RMat::identity(d, d) * (1e-12 * hess.norm().max(1e-300));
                match reg.lu().solve(&grad) {
                    Some(s) => s,
                    None => break,
                }
            }
        };
        let decrement = grad.dot(&step);
        // ill-conditioned at tiny barrier weights: keep the last feasible iterate
        if !decrement.is_finite() {
            break;
        }
        if decrement < 1e-18 {
            break;
        }
        let f0 = barrier_value(lmi, obj, &y, mu).expect("current point is feasible");
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..80 {
            let trial = &y + &step * t;
            if let Some(f1) = barrier_value(lmi, obj, &trial, mu) {
                if f1 >= f0 + 0.25 * t * decrement {
                    y = trial;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted || decrement < 1e-14 {
            break;
        }
    }
    Ok(y)
}

/// Follows the central path through the `mus` ladder.
pub fn barrier_path(lmi: &Lmi, obj: &RVec, y0: RVec, mus: &[f64]) -> Result<RVec> {
    let norm = obj.norm();
    let obj = if norm > 0.0 { obj / norm } else { obj.clone() };
    let mut y = y0;
    for &mu in mus {
        y = center(lmi, &obj, y, mu)?;
    }
    Ok(y)
}

pub fn ladder(start: f64, end: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut mu = start;
    while mu >= end * 0.999 {
        out.push(mu);
        mu *= 0.1;
    }
    out
}

/// Outcome of phase one: a reduced problem with a strictly feasible point.
pub struct Interior {
    pub reduced: Reduced,
    pub point: RVec,
    /// Facial-reduction steps that were needed.
    pub reductions: usize,
}

/// Phase one with facial reduction. Maximizes `s` subject to `B_b(y) ⪰ s I`;
/// while the optimum is zero, the dual estimate `μ (B − sI)⁻¹` identifies
/// directions on which every feasible point vanishes, and the problem is
/// restricted to that face.
pub fn find_interior(lmi: &Lmi) -> Result<Interior> {
    let scale = lmi.scale();
    let mut reduced = Reduced {
        lmi: lmi.clone(),
        origin: RVec::zeros(lmi.dim),
        basis: RMat::identity(lmi.dim, lmi.dim),
    };
    for step in 0..8 {
        let cur = &reduced.lmi;
        let d = cur.dim;
        let y0 = RVec::zeros(d);
        let hs = cur.eval(&y0);
        if cur.blocks.is_empty() {
            return Ok(Interior {
                reduced,
                point: y0,
                reductions: step,
            });
        }
        if d == 0 {
            let ok = hs
                .iter()
                .all(|h| hermitian_eigen(h).0.first().copied().unwrap_or(1.0) > 0.0);
            if ok {
                return Ok(Interior {
                    reduced,
                    point: y0,
                    reductions: step,
                });
            }
        }
        // augmented problem in (y, s)
        let mut aug = cur.clone();
        aug.dim = d + 1;
        for b in aug.blocks.iter_mut() {
            let k = b.offset.nrows();
            b.dirs.push(-CMat::identity(k, k));
        }
        let s0 = hs
            .iter()
            .map(|h| hermitian_eigen(h).0[0])
            .fold(f64::INFINITY, f64::min)
            - 1.0;
        let mut ys = RVec::zeros(d + 1);
        ys[d] = s0;
        let mut obj = RVec::zeros(d + 1);
        obj[d] = 1.0;
        let interior_tol = 1e-7 * scale;
        let mut last_mu = 1.0;
        for mu in ladder(1.0, 1e-10) {
            ys = center(&aug, &obj, ys, mu)?;
            last_mu = mu;
            if ys[d] > interior_tol {
                break;
            }
        }
        if ys[d] > interior_tol {
            let y = ys.rows(0, d).into_owned();
            return Ok(Interior {
                reduced,
                point: y,
                reductions: step,
            });
        }
        // facial reduction from the dual estimate
        let y = ys.rows(0, d).into_owned();
        let s = ys[d];
        let hs = cur.eval(&y);
        let mut zs = Vec::new();
        let mut zmax = 0.0f64;
        for h in &hs {
            let k = h.nrows();
            let shifted = h - CMat::identity(k, k).scale(s);
            let (vals, vecs) = hermitian_eigen(&shifted);
            let zvals: Vec<f64> = vals.iter().map(|v| last_mu / v.max(1e-300)).collect();
            zmax = zs_max(&zvals, zmax);
            zs.push((zvals, vecs));
        }
        let mut us = Vec::new();
        let mut vs = Vec::new();
        for (zvals, vecs) in &zs {
            let k = vecs.nrows();
            let (mut ucols, mut vcols) = (Vec::new(), Vec::new());
            for (i, z) in zvals.iter().enumerate() {
                if *z > 1e-6 * zmax {
                    ucols.push(vecs.column(i).into_owned());
                } else {
                    vcols.push(vecs.column(i).into_owned());
                }
            }
            us.push(cols(k, &ucols));
            vs.push(cols(k, &vcols));
        }
        let (a, rhs) = cur.annihilator_system(&us);
        let sol = solve_affine(&a, &rhs, 1e-10);
        if sol.residual > 1e-6 * scale {
            return Err(Error::Solver(format!(
                "facial reduction produced an inconsistent face (residual {:e})",
                sol.residual
            )));
        }
        let next = cur.restrict(&sol.particular, &sol.null_basis).compress(&vs);
        reduced = Reduced {
            origin: reduced.lift(&sol.particular),
            basis: &reduced.basis * &sol.null_basis,
            lmi: next,
        };
    }
    Err(Error::Solver("facial reduction did not terminate".into()))
}

fn zs_max(vals: &[f64], cur: f64) -> f64 {
    vals.iter().copied().fold(cur, f64::max)
}

fn cols(k: usize, v: &[nalgebra::DVector<crate::linalg::C64>]) -> CMat {
    if v.is_empty() {
        CMat::zeros(k, 0)
    } else {
        CMat::from_columns(v)
    }
}

/// Maximizes `obj · y` over the spectrahedron and snaps the barrier solution
/// onto its optimal face. Returns the optimizer in the original parameters.
pub fn maximize(lmi: &Lmi, obj: &RVec, purify_tol: f64) -> Result<RVec> {
    let interior = find_interior(lmi)?;
    let red = &interior.reduced;
    let robj = red.basis.transpose() * obj;
    if red.lmi.dim == 0 || red.lmi.blocks.is_empty() {
        return Ok(red.lift(&interior.point));
    }
    let z = barrier_path(&red.lmi, &robj, interior.point.clone(), &ladder(1.0, 1e-8))?;
    let z = purify(&red.lmi, &robj, z, purify_tol)?;
    Ok(red.lift(&z))
}

/// Identifies near-null eigenvectors at a barrier point and re-solves on the
/// face where they vanish exactly.
fn purify(lmi: &Lmi, obj: &RVec, z: RVec, tol: f64) -> Result<RVec> {
    let hs = lmi.eval(&z);
    let scale = hs
        .iter()
        .map(|h| hermitian_eigen(h).0.last().copied().unwrap_or(0.0))
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let mut us = Vec::new();
    let mut vs = Vec::new();
    let mut any = false;
    for h in &hs {
        let k = h.nrows();
        let (vals, vecs) = hermitian_eigen(h);
        let (mut ucols, mut vcols) = (Vec::new(), Vec::new());
        for (i, v) in vals.iter().enumerate() {
            if *v < tol * scale {
                ucols.push(vecs.column(i).into_owned());
                any = true;
            } else {
                vcols.push(vecs.column(i).into_owned());
            }
        }
        us.push(cols(k, &ucols));
        vs.push(cols(k, &vcols));
    }
    if !any {
        return Ok(z);
    }
    let (a, rhs) = lmi.annihilator_system(&us);
    let sol = solve_affine(&a, &rhs, 1e-10);
    if sol.residual > 1e-5 * scale {
        return Ok(z);
    }
    let candidate = if sol.null_basis.ncols() == 0 {
        let nulls: Vec<usize> = us.iter().map(|u| u.ncols()).collect();
        refine_vertex(lmi, sol.particular.clone(), &nulls, sol.residual, 1e-13 * scale)
    } else {
        let face = lmi.restrict(&sol.particular, &sol.null_basis).compress(&vs);
        let start = sol.null_basis.transpose() * (&z - &sol.particular);
        if factor(&face.eval(&start)).is_none() {
            return Ok(z);
        }
        let fobj = sol.null_basis.transpose() * obj;
        let w = barrier_path(&face, &fobj, start, &ladder(1e-4, 1e-12))?;
        &sol.particular + &sol.null_basis * w
    };
    let worst = lmi
        .eval(&candidate)
        .iter()
        .map(|h| hermitian_eigen(h).0.first().copied().unwrap_or(0.0))
        .fold(f64::INFINITY, f64::min);
    if worst < -1e-9 * scale {
        return Ok(z);
    }
    Ok(candidate)
}

const REFINE_ROUNDS: usize = 1000;

/// Repeats the annihilator solve with null vectors taken from the current
/// candidate, keeping the per-block null dimensions fixed. Converges
/// linearly; stops at `floor` or when the residual stalls.
fn refine_vertex(lmi: &Lmi, mut y: RVec, nulls: &[usize], mut residual: f64, floor: f64) -> RVec {
    for _ in 0..REFINE_ROUNDS {
        if residual <= floor {
            break;
        }
        let us: Vec<CMat> = lmi
            .eval(&y)
            .iter()
            .zip(nulls)
            .map(|(h, &k)| {
                let (_, vecs) = hermitian_eigen(h);
                vecs.columns(0, k).into_owned()
            })
            .collect();
        let (a, rhs) = lmi.annihilator_system(&us);
        let sol = solve_affine(&a, &rhs, 1e-10);
        if sol.null_basis.ncols() != 0 || !(sol.residual < residual) {
            break;
        }
        residual = sol.residual;
        y = sol.particular;
    }
    y
}
