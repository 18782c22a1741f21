//! Inequalities every catalog operator must satisfy. Each check returns a
//! proptest failure with the offending numbers, or rejects the case when
//! its precondition cannot be evaluated.

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use sppa_core::{ConvexFn, Error, OperatorSpec, Vector};

type Case = Result<(), TestCaseError>;

fn skip_unsupported<T>(r: sppa_core::Result<T>) -> Result<T, TestCaseError> {
    match r {
        Ok(v) => Ok(v),
        Err(Error::UnsupportedSet | Error::UnsupportedComposite) => Err(TestCaseError::reject("unsupported")),
        Err(e) => Err(TestCaseError::fail(format!("{e}"))),
    }
}

/// `⟨Jx - Jy, x - y⟩ ≥ ‖Jx - Jy‖² - 1e-9 (1 + ‖x - y‖²)`
pub fn firm_nonexpansive(op: &OperatorSpec, x: &Vector, y: &Vector, lambda: f64) -> Case {
    let jx = op.resolvent(lambda, x).map_err(|e| TestCaseError::fail(format!("{e}")))?;
    let jy = op.resolvent(lambda, y).map_err(|e| TestCaseError::fail(format!("{e}")))?;
    let dj = &jx - &jy;
    let lhs = dj.dot(&(x - y));
    let rhs = dj.norm_sq() - 1e-9 * (1.0 + x.distance(y).powi(2));
    prop_assert!(lhs >= rhs, "lhs {lhs} < rhs {rhs}");
    Ok(())
}

/// `‖A_λx - A_λy‖ ≤ ‖x - y‖/λ + 1e-9`
pub fn yosida_lipschitz(op: &OperatorSpec, x: &Vector, y: &Vector, lambda: f64) -> Case {
    let ax = op.yosida(lambda, x).map_err(|e| TestCaseError::fail(format!("{e}")))?;
    let ay = op.yosida(lambda, y).map_err(|e| TestCaseError::fail(format!("{e}")))?;
    let lhs = ax.distance(&ay);
    let rhs = x.distance(y) / lambda + 1e-9;
    prop_assert!(lhs <= rhs, "lhs {lhs} > rhs {rhs}");
    Ok(())
}

/// `‖A_λx‖ ≤ ‖A₀x‖ + 1e-9` at `x` pulled into the domain.
pub fn least_norm_dominates(op: &OperatorSpec, x: &Vector, lambda: f64) -> Case {
    let x = skip_unsupported(op.domain_projection(x))?;
    let a0 = skip_unsupported(op.least_norm(&x))?;
    let a = op.yosida(lambda, &x).map_err(|e| TestCaseError::fail(format!("{e}")))?;
    prop_assert!(a.norm() <= a0.norm() + 1e-9, "‖A_λx‖ {} > ‖A₀x‖ {}", a.norm(), a0.norm());
    Ok(())
}

/// With `j = prox(f, λ, x)` and `g = (x - j)/λ`:
/// `f(y) ≥ f(j) + ⟨g, y - j⟩ - 1e-8` for every `y` in the domain.
pub fn prox_subgradient(f: &ConvexFn, x: &Vector, lambda: f64, ys: &[Vector]) -> Case {
    let j = skip_unsupported(f.prox(lambda, x))?;
    let g = (x - &j).scale(1.0 / lambda);
    let fj = f.value(&j).map_err(|e| TestCaseError::fail(format!("{e}")))?;
    prop_assert!(fj.is_finite(), "prox left the domain: f(j) = {fj}");
    for y in ys {
        let y = match f.domain_set() {
            Some(set) => skip_unsupported(sppa_core::operators::project(&set, y))?,
            None => y.clone(),
        };
        let fy = f.value(&y).map_err(|e| TestCaseError::fail(format!("{e}")))?;
        let bound = fj + g.dot(&(&y - &j)) - 1e-8;
        prop_assert!(fy >= bound, "f(y) {fy} < {bound}");
    }
    Ok(())
}

/// `‖J_λx - P_dom(x)‖` is non-increasing over `λ ∈ {1e-2, 1e-4, 1e-6}` and
/// vanishes at the same rate.
pub fn resolvent_limit(op: &OperatorSpec, x: &Vector) -> Case {
    let p = skip_unsupported(op.domain_projection(x))?;
    let mut previous = f64::INFINITY;
    for lambda in [1e-2, 1e-4, 1e-6] {
        let gap = op.resolvent(lambda, x).map_err(|e| TestCaseError::fail(format!("{e}")))?.distance(&p);
        prop_assert!(gap <= previous + 1e-12, "gap {gap} at λ={lambda} above {previous}");
        previous = gap;
    }
    prop_assert!(previous <= 1e-3 * (1.0 + x.norm()), "gap {previous} at λ=1e-6");
    Ok(())
}

/// `⟨A_λx - φ, x - u⟩ ≥ λ(1-β)‖A_λx‖² - λ/(4β) ‖φ‖²` with `φ = A₀u`.
pub fn yosida_drift(op: &OperatorSpec, x: &Vector, u: &Vector, lambda: f64, beta: f64) -> Case {
    let u = skip_unsupported(op.domain_projection(u))?;
    let phi = skip_unsupported(op.least_norm(&u))?;
    let a = op.yosida(lambda, x).map_err(|e| TestCaseError::fail(format!("{e}")))?;
    let lhs = (&a - &phi).dot(&(x - &u));
    let growth = lambda * (1.0 - beta) * a.norm_sq();
    let penalty = lambda / (4.0 * beta) * phi.norm_sq();
    let slack = 1e-9 * (1.0 + lhs.abs() + growth.abs() + penalty);
    prop_assert!(lhs >= growth - penalty - slack, "lhs {lhs} < {growth} - {penalty}");
    Ok(())
}

/// `‖prox_{λg}(x) - π‖ ≤ 2λ‖∂g₀(π)‖` with `π` the projection of `x` onto the
/// domain of `g`.
pub fn prox_near_domain(g: &ConvexFn, x: &Vector, lambda: f64) -> Case {
    let set = g.domain_set().ok_or_else(|| TestCaseError::reject("full domain"))?;
    let pi = skip_unsupported(sppa_core::operators::project(&set, x))?;
    let phi = skip_unsupported(g.least_norm_subgradient(&pi))?;
    let j = skip_unsupported(g.prox(lambda, x))?;
    let lhs = j.distance(&pi);
    let rhs = 2.0 * lambda * phi.norm() + 1e-9;
    prop_assert!(lhs <= rhs, "‖prox - π‖ {lhs} > {rhs}");
    Ok(())
}
