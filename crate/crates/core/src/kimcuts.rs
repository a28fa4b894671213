//! Second-order cone and linear cuts on a 3×3 Hermitian voltage-product block.
//!
//! For a Hermitian PSD matrix partitioned around a diagonal scalar `α`,
//!
//! ```text
//! M = [ α  aᴴ ]
//!     [ a  A  ]
//! ```
//!
//! every complex vector `c` gives the valid convex inequality
//! `|cᴴa|² ≤ α·(C • A)` with `C = c·cᴴ`, together with the linear condition
//! `C • A ≥ 0`. With `c = (1, r·e^{jθ})` this is a two-parameter family of
//! rotated second-order cones over the nine real entries of the block. `r = 0`
//! recovers the classical 2×2 principal-minor cone, and every member is tight
//! on rank-1 matrices.
//!
//! The three partitions follow the cyclic orders `(1; 2, 3)`, `(2; 3, 1)` and
//! `(3; 1, 2)`: `α` is the first index and `c` weights the remaining two in
//! that order, so `r·e^{jθ}` multiplies bus 3, 1 and 2 respectively.
//!
//! Cuts are emitted symbolically over the nine-symbol alphabet [`Sym`] and
//! bound to program variables by the relaxation builder. [`eval_kim`]
//! evaluates the same inequality numerically from the complex partition, which
//! the tests use to cross-check the symbolic coefficients.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{Matrix3, Vector2};
use num_complex::Complex64;
use serde::Serialize;

/// Real coordinates of a 3×3 Hermitian matrix, convention `W_pq = U_p·U_q^*` for `p < q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Sym {
    W11,
    W22,
    W33,
    W12Re,
    W12Im,
    W13Re,
    W13Im,
    W23Re,
    W23Im,
}

impl Sym {
    pub const ALL: [Sym; 9] = [
        Sym::W11,
        Sym::W22,
        Sym::W33,
        Sym::W12Re,
        Sym::W12Im,
        Sym::W13Re,
        Sym::W13Im,
        Sym::W23Re,
        Sym::W23Im,
    ];

    pub fn diag(p: usize) -> Sym {
        [Sym::W11, Sym::W22, Sym::W33][p]
    }

    /// `(re, im)` symbols of the off-diagonal entry `(p, q)`, `p < q`, zero-based.
    pub fn off_diag(p: usize, q: usize) -> (Sym, Sym) {
        match (p, q) {
            (0, 1) => (Sym::W12Re, Sym::W12Im),
            (0, 2) => (Sym::W13Re, Sym::W13Im),
            (1, 2) => (Sym::W23Re, Sym::W23Im),
            _ => panic!("no off-diagonal symbol for ({p}, {q})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct HermitianBlock3 {
    pub w11: f64,
    pub w22: f64,
    pub w33: f64,
    pub w12re: f64,
    pub w12im: f64,
    pub w13re: f64,
    pub w13im: f64,
    pub w23re: f64,
    pub w23im: f64,
}

impl HermitianBlock3 {
    pub fn identity() -> Self {
        Self {
            w11: 1.0,
            w22: 1.0,
            w33: 1.0,
            ..Self::default()
        }
    }

    /// `U·Uᴴ` for a voltage triple.
    pub fn from_voltages(u: [Complex64; 3]) -> Self {
        Self::from_fn(|p, q| u[p] * u[q].conj())
    }

    /// Reads the upper triangle of a complex matrix (assumed Hermitian).
    pub fn from_matrix(m: &Matrix3<Complex64>) -> Self {
        Self::from_fn(|p, q| m[(p, q)])
    }

    fn from_fn(f: impl Fn(usize, usize) -> Complex64) -> Self {
        let (w12, w13, w23) = (f(0, 1), f(0, 2), f(1, 2));
        Self {
            w11: f(0, 0).re,
            w22: f(1, 1).re,
            w33: f(2, 2).re,
            w12re: w12.re,
            w12im: w12.im,
            w13re: w13.re,
            w13im: w13.im,
            w23re: w23.re,
            w23im: w23.im,
        }
    }

    pub fn get(&self, s: Sym) -> f64 {
        match s {
            Sym::W11 => self.w11,
            Sym::W22 => self.w22,
            Sym::W33 => self.w33,
            Sym::W12Re => self.w12re,
            Sym::W12Im => self.w12im,
            Sym::W13Re => self.w13re,
            Sym::W13Im => self.w13im,
            Sym::W23Re => self.w23re,
            Sym::W23Im => self.w23im,
        }
    }

    /// Entry `(p, q)` (zero-based) of the Hermitian matrix.
    pub fn entry(&self, p: usize, q: usize) -> Complex64 {
        match p.cmp(&q) {
            std::cmp::Ordering::Equal => Complex64::new(self.get(Sym::diag(p)), 0.0),
            std::cmp::Ordering::Less => {
                let (re, im) = Sym::off_diag(p, q);
                Complex64::new(self.get(re), self.get(im))
            }
            std::cmp::Ordering::Greater => self.entry(q, p).conj(),
        }
    }

    pub fn to_matrix(&self) -> Matrix3<Complex64> {
        Matrix3::from_fn(|p, q| self.entry(p, q))
    }
}

/// Which diagonal entry plays the scalar `α` of the partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Partition {
    First,
    Second,
    Third,
}

impl Partition {
    pub const ALL: [Partition; 3] = [Partition::First, Partition::Second, Partition::Third];

    pub fn index(self) -> usize {
        self as usize
    }

    /// The two remaining indices in cyclic order after `self`.
    pub fn others(self) -> [usize; 2] {
        match self {
            Partition::First => [1, 2],
            Partition::Second => [2, 0],
            Partition::Third => [0, 1],
        }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index() + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KimCutParams {
    pub partition: Partition,
    pub r: f64,
    pub theta: f64,
}

impl KimCutParams {
    pub fn new(partition: Partition, r: f64, theta: f64) -> Self {
        assert!(r >= 0.0, "kim cut scale must be nonnegative, got {r}");
        Self {
            partition,
            r,
            theta,
        }
    }

    pub fn label(&self) -> String {
        format!("part={}/theta={:.3}", self.partition, self.theta)
    }
}

/// Linear form over the nine block symbols.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SymExpr(pub Vec<(Sym, f64)>);

impl SymExpr {
    pub fn sym(s: Sym) -> Self {
        SymExpr(vec![(s, 1.0)])
    }

    fn with(mut self, s: Sym, c: f64) -> Self {
        self.0.push((s, c));
        self
    }

    pub fn eval(&self, w: &HermitianBlock3) -> f64 {
        self.0.iter().map(|&(s, c)| c * w.get(s)).sum()
    }

    /// Coefficients merged per symbol, zeros dropped, in symbol order.
    pub fn canonical(&self) -> BTreeMap<Sym, f64> {
        let mut m = BTreeMap::new();
        for &(s, c) in &self.0 {
            *m.entry(s).or_insert(0.0) += c;
        }
        m.retain(|_, c| *c != 0.0);
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CutKind {
    /// `u₁² + u₂² ≤ α·β`, `α, β ≥ 0` (a rotated second-order cone).
    Soc {
        u: [SymExpr; 2],
        alpha: SymExpr,
        beta: SymExpr,
    },
    /// `expr ≥ 0`
    Linear(SymExpr),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutRow {
    pub kind: CutKind,
    pub label: String,
}

impl CutRow {
    /// `(lhs, rhs)` of the row at `w`: `(‖u‖², α·β)` for cones, `(0, expr)` for linear rows.
    pub fn eval(&self, w: &HermitianBlock3) -> (f64, f64) {
        match &self.kind {
            CutKind::Soc { u, alpha, beta } => {
                let lhs = u.iter().map(|e| e.eval(w).powi(2)).sum();
                (lhs, alpha.eval(w) * beta.eval(w))
            }
            CutKind::Linear(e) => (0.0, e.eval(w)),
        }
    }

    /// `rhs − lhs`; nonnegative when the row holds.
    pub fn slack(&self, w: &HermitianBlock3) -> f64 {
        let (lhs, rhs) = self.eval(w);
        rhs - lhs
    }

    /// Compares two cone rows coefficient by coefficient, treating `α·β` as unordered.
    pub fn same_cone(&self, other: &CutRow) -> bool {
        match (&self.kind, &other.kind) {
            (
                CutKind::Soc { u, alpha, beta },
                CutKind::Soc {
                    u: u2,
                    alpha: a2,
                    beta: b2,
                },
            ) => {
                let (a, b, a2, b2) = (alpha.canonical(), beta.canonical(), a2.canonical(), b2.canonical());
                u[0].canonical() == u2[0].canonical()
                    && u[1].canonical() == u2[1].canonical()
                    && ((a == a2 && b == b2) || (a == b2 && b == a2))
            }
            (CutKind::Linear(e), CutKind::Linear(e2)) => e.canonical() == e2.canonical(),
            _ => false,
        }
    }
}

fn pm_row(p: usize, q: usize) -> CutRow {
    let (re, im) = Sym::off_diag(p, q);
    CutRow {
        kind: CutKind::Soc {
            u: [SymExpr::sym(re), SymExpr::sym(im)],
            alpha: SymExpr::sym(Sym::diag(p)),
            beta: SymExpr::sym(Sym::diag(q)),
        },
        label: format!("pm/pair={}{}", p + 1, q + 1),
    }
}

/// The three 2×2 principal-minor cones `|W_pq|² ≤ W_pp·W_qq`.
pub fn pm_soc_rows() -> [CutRow; 3] {
    [pm_row(0, 1), pm_row(0, 2), pm_row(1, 2)]
}

/// `C • A` for `c = (1, r·e^{jθ})`: the budget multiplying `α` in the cone,
/// also required to be nonnegative on its own.
fn frobenius_expr(p: &KimCutParams) -> SymExpr {
    let (s, c) = p.theta.sin_cos();
    let r = p.r;
    use Sym::*;
    let (a, b, re, im, im_sign) = match p.partition {
        Partition::First => (W22, W33, W23Re, W23Im, -1.0),
        Partition::Second => (W33, W11, W13Re, W13Im, 1.0),
        Partition::Third => (W11, W22, W12Re, W12Im, -1.0),
    };
    SymExpr::sym(a)
        .with(b, r * r)
        .with(re, 2.0 * r * c)
        .with(im, im_sign * 2.0 * r * s)
}

/// Member `(r, θ)` of the cone family for the given partition.
pub fn kim_soc_row(p: &KimCutParams) -> CutRow {
    let (s, c) = p.theta.sin_cos();
    let r = p.r;
    let (rc, rs) = (r * c, r * s);
    use Sym::*;
    let u = match p.partition {
        Partition::First => [
            SymExpr::sym(W12Re).with(W13Re, rc).with(W13Im, -rs),
            SymExpr::sym(W12Im).with(W13Im, rc).with(W13Re, rs),
        ],
        Partition::Second => [
            SymExpr::sym(W23Re).with(W12Re, rc).with(W12Im, rs),
            SymExpr::sym(W23Im).with(W12Im, -rc).with(W12Re, rs),
        ],
        Partition::Third => [
            SymExpr::sym(W13Re).with(W23Re, rc).with(W23Im, rs),
            SymExpr::sym(W13Im).with(W23Im, rc).with(W23Re, -rs),
        ],
    };
    CutRow {
        kind: CutKind::Soc {
            u,
            alpha: SymExpr::sym(Sym::diag(p.partition.index())),
            beta: frobenius_expr(p),
        },
        label: format!("kim/{}", p.label()),
    }
}

/// Linear companion `C • A ≥ 0` of [`kim_soc_row`].
pub fn frobenius_row(p: &KimCutParams) -> CutRow {
    CutRow {
        kind: CutKind::Linear(frobenius_expr(p)),
        label: format!("frob/{}", p.label()),
    }
}

/// `(|cᴴa|², α·(C • A))` computed directly from the complex partition of `w`.
pub fn eval_kim(w: &HermitianBlock3, p: &KimCutParams) -> (f64, f64) {
    let m = w.to_matrix();
    let k = p.partition.index();
    let [o1, o2] = p.partition.others();
    let alpha = m[(k, k)].re;
    let a = Vector2::new(m[(o1, k)], m[(o2, k)]);
    let big_a = nalgebra::Matrix2::new(m[(o1, o1)], m[(o1, o2)], m[(o2, o1)], m[(o2, o2)]);
    let c = Vector2::new(Complex64::new(1.0, 0.0), Complex64::from_polar(p.r, p.theta));
    let big_c = c * c.adjoint();

    let ca = (c.adjoint() * a)[(0, 0)];
    let frob: Complex64 = big_c
        .iter()
        .zip(big_a.iter())
        .map(|(cij, aij)| cij.conj() * aij)
        .sum();
    (ca.norm_sqr(), alpha * frob.re)
}
