//! Per-unit network model parsed from MATPOWER case text.
//!
//! Bus ids from the file are renumbered to contiguous internal indices at
//! parse time; everything downstream of this module works with internal
//! indices only.

mod parse;
mod triangles;

use num_complex::Complex64;
use serde::Serialize;

pub use parse::{parse_matpower, ParseError};
pub use triangles::{branch_pairs, enumerate_triangles, Triangle};

/// Angle-difference limits are clamped into `(-ANGLE_CLAMP_DEG, ANGLE_CLAMP_DEG)`.
pub const ANGLE_CLAMP_DEG: f64 = 89.9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bus {
    /// External label from the case file.
    pub id: i64,
    pub vmin: f64,
    pub vmax: f64,
    pub gs: f64,
    pub bs: f64,
    pub pd: f64,
    pub qd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Branch {
    pub from_bus: usize,
    pub to_bus: usize,
    pub r: f64,
    pub x: f64,
    pub b_charge: f64,
    /// Off-nominal tap ratio; a zero in the file is stored as 1.0.
    pub tap: f64,
    /// Phase shift in radians.
    pub shift: f64,
    /// Apparent power limit in p.u.; 0 means unlimited.
    pub rate_a: f64,
    pub angmin: f64,
    pub angmax: f64,
    pub status: bool,
}

/// Pi-model admittances of a branch, all in p.u.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchAdmittance {
    pub y_series: Complex64,
    pub shunt_from: Complex64,
    pub shunt_to: Complex64,
    /// `tap * exp(j * shift)`
    pub tap_complex: Complex64,
}

impl Branch {
    pub fn admittance(&self) -> BranchAdmittance {
        branch_admittance(self)
    }

    pub fn in_service(&self) -> bool {
        self.status
    }
}

/// Standard pi-model: `y = 1/(r + jx)`, half the line charging on each side.
pub fn branch_admittance(b: &Branch) -> BranchAdmittance {
    let y_series = Complex64::new(b.r, b.x).inv();
    let shunt = Complex64::new(0.0, b.b_charge / 2.0);
    BranchAdmittance {
        y_series,
        shunt_from: shunt,
        shunt_to: shunt,
        tap_complex: Complex64::from_polar(b.tap, b.shift),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Generator {
    pub bus: usize,
    pub pmin: f64,
    pub pmax: f64,
    pub qmin: f64,
    pub qmax: f64,
    /// Cost coefficients against MW output, exactly as in the file.
    pub cost_c2: f64,
    pub cost_c1: f64,
    pub cost_c0: f64,
    pub status: bool,
}

impl Generator {
    /// Cost coefficients rescaled so that `c2*pg^2 + c1*pg + c0` takes `pg`
    /// in p.u. and returns $/h.
    pub fn pu_cost_coeffs(&self, base_mva: f64) -> (f64, f64, f64) {
        (
            self.cost_c2 * base_mva * base_mva,
            self.cost_c1 * base_mva,
            self.cost_c0,
        )
    }

    /// Cost in $/h of producing `pg_pu` (p.u. on `base_mva`).
    pub fn cost_pu(&self, pg_pu: f64, base_mva: f64) -> f64 {
        let (c2, c1, c0) = self.pu_cost_coeffs(base_mva);
        (c2 * pg_pu + c1) * pg_pu + c0
    }

    /// Cost in $/h of producing `pg_mw` megawatts.
    pub fn cost_mw(&self, pg_mw: f64) -> f64 {
        (self.cost_c2 * pg_mw + self.cost_c1) * pg_mw + self.cost_c0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkCase {
    pub name: String,
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub gens: Vec<Generator>,
}

impl NetworkCase {
    pub fn n_buses(&self) -> usize {
        self.buses.len()
    }

    pub fn active_branches(&self) -> impl Iterator<Item = (usize, &Branch)> {
        self.branches.iter().enumerate().filter(|(_, b)| b.status)
    }

    pub fn active_gens(&self) -> impl Iterator<Item = (usize, &Generator)> {
        self.gens.iter().enumerate().filter(|(_, g)| g.status)
    }

    /// Total cost in $/h of a dispatch given in p.u. (one entry per generator,
    /// out-of-service entries ignored).
    pub fn dispatch_cost(&self, pg_pu: &[f64]) -> f64 {
        self.active_gens()
            .map(|(k, g)| g.cost_pu(pg_pu[k], self.base_mva))
            .sum()
    }

    /// Deterministic JSON rendering of the full model, field by field.
    pub fn canonical_report(&self) -> String {
        serde_json::to_string_pretty(self).expect("network case is always serializable")
    }

    /// Checks the structural invariants of the model.
    pub fn validate(&self) -> Result<(), ParseError> {
        let n = self.buses.len();
        let invalid = |msg: String| Err(ParseError::Invalid(msg));
        if !(self.base_mva > 0.0) {
            return invalid(format!("baseMVA must be positive, got {}", self.base_mva));
        }
        for b in &self.buses {
            if !(b.vmin > 0.0 && b.vmin <= b.vmax) {
                return invalid(format!(
                    "bus {}: voltage bounds must satisfy 0 < vmin <= vmax (got {}, {})",
                    b.id, b.vmin, b.vmax
                ));
            }
        }
        for (k, br) in self.branches.iter().enumerate() {
            if br.from_bus >= n || br.to_bus >= n {
                return invalid(format!("branch {k}: endpoint out of range"));
            }
            if br.from_bus == br.to_bus {
                return invalid(format!("branch {k}: self loop"));
            }
            if br.r * br.r + br.x * br.x <= 0.0 {
                return invalid(format!("branch {k}: zero series impedance"));
            }
            if !(br.tap > 0.0) {
                return invalid(format!("branch {k}: tap ratio must be positive"));
            }
            if !(br.angmin <= 0.0 && br.angmax >= 0.0) {
                return invalid(format!(
                    "branch {k}: angle limits must bracket zero (got {}, {})",
                    br.angmin, br.angmax
                ));
            }
        }
        for (k, g) in self.gens.iter().enumerate() {
            if g.bus >= n {
                return invalid(format!("generator {k}: bus out of range"));
            }
            if g.pmin > g.pmax || g.qmin > g.qmax {
                return invalid(format!("generator {k}: inverted output bounds"));
            }
            if g.cost_c2 < 0.0 {
                return invalid(format!("generator {k}: negative quadratic cost"));
            }
        }
        if !self.gens.iter().any(|g| g.status) {
            return invalid("no generator in service".to_string());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn branch(r: f64, x: f64, b: f64, tap: f64, shift: f64) -> Branch {
        Branch {
            from_bus: 0,
            to_bus: 1,
            r,
            x,
            b_charge: b,
            tap,
            shift,
            rate_a: 0.0,
            angmin: -0.5,
            angmax: 0.5,
            status: true,
        }
    }

    #[test]
    fn pure_reactance_admittance() {
        let y = branch(0.0, 0.1, 0.0, 1.0, 0.0).admittance();
        assert_relative_eq!(y.y_series.re, 0.0);
        assert_relative_eq!(y.y_series.im, -10.0, epsilon = 1e-12);
    }

    #[test]
    fn lossy_line_admittance() {
        // 1/(0.01 + 0.1j) = (0.01 - 0.1j)/0.0101
        let y = branch(0.01, 0.1, 0.02, 1.0, 0.0).admittance();
        assert_relative_eq!(y.y_series.re, 0.990_099_009_9, epsilon = 1e-9);
        assert_relative_eq!(y.y_series.im, -9.900_990_099, epsilon = 1e-9);
        assert_eq!(y.shunt_from, Complex64::new(0.0, 0.01));
        assert_eq!(y.shunt_to, Complex64::new(0.0, 0.01));
        assert_eq!(y.tap_complex, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn phase_shifting_tap() {
        let y = branch(0.0, 0.1, 0.0, 1.05, 30f64.to_radians()).admittance();
        assert_relative_eq!(y.tap_complex.re, 1.05 * 30f64.to_radians().cos(), epsilon = 1e-15);
        assert_relative_eq!(y.tap_complex.im, 1.05 * 0.5, epsilon = 1e-12);
    }
}
