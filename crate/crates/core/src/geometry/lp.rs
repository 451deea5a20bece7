//! Small linear programs over a half-space description `a_i·x + b_i ≤ 0`.

use minilp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem, Variable};

use crate::{Error, Result};

const FREE: (f64, f64) = (f64::NEG_INFINITY, f64::INFINITY);

fn lp_error(e: minilp::Error, what: &str) -> Error {
    match e {
        minilp::Error::Infeasible => Error::domain(format!("{what}: infeasible")),
        minilp::Error::Unbounded => Error::domain(format!("{what}: unbounded")),
    }
}

/// `max ⟨c, x⟩` over the polytope, with a maximiser.
pub(crate) fn support(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<(f64, Vec<f64>)> {
    let mut p = Problem::new(OptimizationDirection::Maximize);
    let x: Vec<Variable> = c.iter().map(|&ci| p.add_var(ci, FREE)).collect();
    for (row, bi) in a.iter().zip(b) {
        let expr: LinearExpr = x.iter().zip(row).map(|(&v, &aij)| (v, aij)).collect();
        p.add_constraint(expr, ComparisonOp::Le, -bi);
    }
    let sol = p.solve().map_err(|e| lp_error(e, "support function"))?;
    Ok((sol.objective(), x.iter().map(|&v| sol[v]).collect()))
}

/// `min_x max_i (a_i·x + b_i)` with a minimiser.
pub(crate) fn deepest_point(a: &[Vec<f64>], b: &[f64]) -> Result<(f64, Vec<f64>)> {
    let d = a[0].len();
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let x: Vec<Variable> = (0..d).map(|_| p.add_var(0.0, FREE)).collect();
    let t = p.add_var(1.0, FREE);
    for (row, bi) in a.iter().zip(b) {
        let mut expr: LinearExpr = x.iter().zip(row).map(|(&v, &aij)| (v, aij)).collect();
        expr.add(t, -1.0);
        p.add_constraint(expr, ComparisonOp::Le, -bi);
    }
    let sol = p.solve().map_err(|e| lp_error(e, "deepest point"))?;
    Ok((sol[t], x.iter().map(|&v| sol[v]).collect()))
}

/// `min_y max(H(y), H(r·y))` with a minimiser.
pub(crate) fn joint_residual(a: &[Vec<f64>], b: &[f64], r: f64) -> Result<(f64, Vec<f64>)> {
    let d = a[0].len();
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let y: Vec<Variable> = (0..d).map(|_| p.add_var(0.0, FREE)).collect();
    let t = p.add_var(1.0, FREE);
    for (row, bi) in a.iter().zip(b) {
        for scale in [1.0, r] {
            let mut expr: LinearExpr = y.iter().zip(row).map(|(&v, &aij)| (v, scale * aij)).collect();
            expr.add(t, -1.0);
            p.add_constraint(expr, ComparisonOp::Le, -bi);
        }
    }
    let sol = p.solve().map_err(|e| lp_error(e, "joint residual"))?;
    Ok((sol[t], y.iter().map(|&v| sol[v]).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box() -> (Vec<Vec<f64>>, Vec<f64>) {
        // [1,2]^2
        let a = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]];
        let b = vec![-2.0, 1.0, -2.0, 1.0];
        (a, b)
    }

    #[test]
    fn support_of_box() {
        let (a, b) = unit_box();
        let (v, x) = support(&a, &b, &[1.0, 1.0]).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
        let half = vec![vec![1.0, 0.0]];
        assert!(support(&half, &[0.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn deepest_point_of_box_is_centre() {
        let (a, b) = unit_box();
        let (t, x) = deepest_point(&a, &b).unwrap();
        assert!((t + 0.5).abs() < 1e-12);
        assert!((x[0] - 1.5).abs() < 1e-12 && (x[1] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn joint_residual_changes_sign_at_two() {
        let (a, b) = unit_box();
        assert!(joint_residual(&a, &b, 1.9).unwrap().0 < 0.0);
        assert!(joint_residual(&a, &b, 2.0).unwrap().0.abs() < 1e-12);
        assert!(joint_residual(&a, &b, 2.1).unwrap().0 > 0.0);
    }
}
