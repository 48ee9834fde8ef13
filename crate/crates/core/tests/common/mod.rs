//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use active_handeye::estimator::CalibrationParams;
use active_handeye::geom::Pose;
use active_handeye::sensing::{CameraIntrinsics, MeasurementSet, TargetBoard};
use nalgebra::DMatrix;

/// Double-double number: `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Clone, Copy, Debug)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

impl Dd {
    pub fn new(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let r = quick_two_sum(s, e + t);
        quick_two_sum(r.hi, r.lo + f)
    }

    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    pub fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        quick_two_sum(p, e + (self.hi * o.lo + self.lo * o.hi))
    }

    pub fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul(Dd::new(q1)));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul(Dd::new(q2)));
        let q3 = r.hi / o.hi;
        quick_two_sum(q1, q2).add(Dd::new(q3))
    }
}

type V3 = [Dd; 3];

fn apply(pose: &Pose, p: &V3) -> V3 {
    let r = pose.rotation.matrix();
    std::array::from_fn(|i| {
        let mut acc = Dd::new(pose.translation[i]);
        for (j, pj) in p.iter().enumerate() {
            acc = acc.add(Dd::new(r[(i, j)]).mul(*pj));
        }
        acc
    })
}

/// `exp(delta) * p` for a twist with a single nonzero entry `h` at `axis`
/// (0..3 translation, 3..6 rotation), by truncated series.
fn perturb(p: &V3, axis: usize, h: f64) -> V3 {
    let mut out = *p;
    if axis < 3 {
        out[axis] = out[axis].add(Dd::new(h));
        return out;
    }
    // rotation about coordinate axis a: terms K^n p / n!
    let a = axis - 3;
    let cross = |v: &V3| -> V3 {
        let w = [0.0, 0.0, 0.0].map(Dd::new);
        let mut w = w;
        w[a] = Dd::new(h);
        [
            w[1].mul(v[2]).sub(w[2].mul(v[1])),
            w[2].mul(v[0]).sub(w[0].mul(v[2])),
            w[0].mul(v[1]).sub(w[1].mul(v[0])),
        ]
    };
    let mut term = *p;
    for n in 1..=5 {
        term = cross(&term).map(|t| t.div(Dd::new(n as f64)));
        for i in 0..3 {
            out[i] = out[i].add(term[i]);
        }
    }
    out
}

fn project(k: &CameraIntrinsics, p: &V3) -> [Dd; 2] {
    [
        Dd::new(k.fx).mul(p[0].div(p[2])).add(Dd::new(k.cx)),
        Dd::new(k.fy).mul(p[1].div(p[2])).add(Dd::new(k.cy)),
    ]
}

/// Projection of marker `p_w` with an optional left perturbation of `T_ce`
/// (column 0..6) or `T_bw` (6..12).
fn projected(
    theta: &CalibrationParams,
    robot: &Pose,
    p_w: &V3,
    k: &CameraIntrinsics,
    col: usize,
    h: f64,
) -> [Dd; 2] {
    let mut p_b = apply(&theta.t_bw, p_w);
    if col >= 6 {
        p_b = perturb(&p_b, col - 6, h);
    }
    let mut p_c = apply(&theta.t_ce, &apply(robot, &p_b));
    if col < 6 {
        p_c = perturb(&p_c, col, h);
    }
    project(k, &p_c)
}

/// Central-difference Jacobian of the residual `observed - projected` under
/// left perturbation, evaluated in double-double arithmetic so the only
/// error left is the O(h^2) truncation.
pub fn fd_jacobian(
    theta: &CalibrationParams,
    set: &MeasurementSet,
    board: &TargetBoard,
    k: &CameraIntrinsics,
    h: f64,
) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * set.len(), 12);
    for (i, obs) in set.observations.iter().enumerate() {
        let p = board.point(obs.marker_id).unwrap();
        let p_w = [Dd::new(p.x), Dd::new(p.y), Dd::new(p.z)];
        for col in 0..12 {
            let plus = projected(theta, &set.robot_pose, &p_w, k, col, h);
            let minus = projected(theta, &set.robot_pose, &p_w, k, col, -h);
            for r in 0..2 {
                // residual = observed - projected, so the sign flips
                let d = minus[r].sub(plus[r]).div(Dd::new(2.0 * h));
                j[(2 * i + r, col)] = d.to_f64();
            }
        }
    }
    j
}

/// `log det(J^T J)` from the R factor of a QR decomposition of `J`.
pub fn logdet_qr(j: &DMatrix<f64>) -> f64 {
    let r = j.clone().qr().r();
    2.0 * r.diagonal().iter().map(|d| d.abs().ln()).sum::<f64>()
}

/// Differential entropy of `N(0, (J^T J)^-1)` in 12 dimensions.
pub fn entropy_qr(j: &DMatrix<f64>) -> f64 {
    6.0 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln() - 0.5 * logdet_qr(j)
}

/// Stacks blocks vertically.
pub fn vstack(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(rows, blocks[0].ncols());
    let mut r = 0;
    for b in blocks {
        out.view_mut((r, 0), (b.nrows(), b.ncols())).copy_from(b);
        r += b.nrows();
    }
    out
}
