//! Randomized law checking for semirings and modules.
//!
//! Failures are report entries with a counterexample, not errors, so a
//! deliberately broken instance can be inspected in tests.

use std::fmt;

use super::{Module, Semiring};

/// Outcome of checking one law.
#[derive(Debug, Clone)]
pub struct LawCheck {
    pub name: &'static str,
    pub passed: bool,
    pub counterexample: Option<String>,
}

/// Results for a whole law suite.
#[derive(Debug, Clone)]
pub struct LawReport {
    pub laws: Vec<LawCheck>,
}

impl LawReport {
    pub fn all_pass(&self) -> bool {
        self.laws.iter().all(|l| l.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &LawCheck> {
        self.laws.iter().filter(|l| !l.passed)
    }
}

impl fmt::Display for LawReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for law in &self.laws {
            writeln!(
                f,
                "{:<24} {}{}",
                law.name,
                if law.passed { "pass" } else { "FAIL" },
                law.counterexample
                    .as_deref()
                    .map(|c| format!("  [{c}]"))
                    .unwrap_or_default()
            )?;
        }
        Ok(())
    }
}

struct Suite {
    laws: Vec<LawCheck>,
}

impl Suite {
    fn new() -> Self {
        Suite { laws: Vec::new() }
    }

    /// Records the first counterexample found by `probe` over `trials` runs.
    fn check(
        &mut self,
        name: &'static str,
        trials: usize,
        mut probe: impl FnMut() -> Option<String>,
    ) {
        let mut failure = None;
        for _ in 0..trials {
            if let Some(cx) = probe() {
                failure = Some(cx);
                break;
            }
        }
        self.laws.push(LawCheck {
            name,
            passed: failure.is_none(),
            counterexample: failure,
        });
    }
}

fn cx2<S: fmt::Debug>(lhs: &S, rhs: &S, x: &S, y: &S) -> Option<String> {
    Some(format!("x={x:?} y={y:?}: {lhs:?} != {rhs:?}"))
}

fn cx3<S: fmt::Debug>(lhs: &S, rhs: &S, x: &S, y: &S, z: &S) -> Option<String> {
    Some(format!("x={x:?} y={y:?} z={z:?}: {lhs:?} != {rhs:?}"))
}

/// Checks the eight commutative-semiring laws on values drawn from `gen`.
pub fn check_semiring_laws<S>(mut gen: impl FnMut() -> S, trials: usize) -> LawReport
where
    S: Semiring + PartialEq + fmt::Debug,
{
    let mut suite = Suite::new();

    suite.check("add_identity", trials, || {
        let x = gen();
        let l = S::zero().add(&x);
        let r = x.add(&S::zero());
        if l == x && r == x {
            None
        } else {
            Some(format!("x={x:?}: 0+x={l:?}, x+0={r:?}"))
        }
    });
    suite.check("mul_identity", trials, || {
        let x = gen();
        let l = S::one().mul(&x);
        let r = x.mul(&S::one());
        if l == x && r == x {
            None
        } else {
            Some(format!("x={x:?}: 1*x={l:?}, x*1={r:?}"))
        }
    });
    suite.check("add_associativity", trials, || {
        let (x, y, z) = (gen(), gen(), gen());
        let l = x.add(&y.add(&z));
        let r = x.add(&y).add(&z);
        (l != r).then(|| cx3(&l, &r, &x, &y, &z)).flatten()
    });
    suite.check("mul_associativity", trials, || {
        let (x, y, z) = (gen(), gen(), gen());
        let l = x.mul(&y.mul(&z));
        let r = x.mul(&y).mul(&z);
        (l != r).then(|| cx3(&l, &r, &x, &y, &z)).flatten()
    });
    suite.check("add_commutativity", trials, || {
        let (x, y) = (gen(), gen());
        let l = x.add(&y);
        let r = y.add(&x);
        (l != r).then(|| cx2(&l, &r, &x, &y)).flatten()
    });
    suite.check("mul_commutativity", trials, || {
        let (x, y) = (gen(), gen());
        let l = x.mul(&y);
        let r = y.mul(&x);
        (l != r).then(|| cx2(&l, &r, &x, &y)).flatten()
    });
    suite.check("distributivity", trials, || {
        let (x, y, z) = (gen(), gen(), gen());
        let l1 = x.mul(&y.add(&z));
        let r1 = x.mul(&y).add(&x.mul(&z));
        let l2 = x.add(&y).mul(&z);
        let r2 = x.mul(&z).add(&y.mul(&z));
        if l1 == r1 && l2 == r2 {
            None
        } else {
            cx3(&l1, &r1, &x, &y, &z)
        }
    });
    suite.check("annihilator", trials, || {
        let x = gen();
        let l = S::zero().mul(&x);
        let r = x.mul(&S::zero());
        if l == S::zero() && r == S::zero() {
            None
        } else {
            Some(format!("x={x:?}: 0*x={l:?}, x*0={r:?}"))
        }
    });

    LawReport { laws: suite.laws }
}

/// Checks the module/monoid laws of a `D`-module on elements drawn from
/// `gen_e` and scalars from `gen_d`. Equality of module elements is the
/// caller's `PartialEq`, which for sparse representations is
/// normalization-equality.
pub fn check_module_laws<D, E>(
    mut gen_e: impl FnMut() -> E,
    mut gen_d: impl FnMut() -> D,
    trials: usize,
) -> LawReport
where
    D: Semiring + fmt::Debug,
    E: Module<D> + PartialEq + fmt::Debug,
{
    let mut suite = Suite::new();

    suite.check("add_identity", trials, || {
        let e = gen_e();
        let l = E::zero().add(&e);
        let r = e.add(&E::zero());
        if l == e && r == e {
            None
        } else {
            Some(format!("e={e:?}: 0+e={l:?}, e+0={r:?}"))
        }
    });
    suite.check("add_associativity", trials, || {
        let (x, y, z) = (gen_e(), gen_e(), gen_e());
        let l = x.add(&y.add(&z));
        let r = x.add(&y).add(&z);
        (l != r).then(|| cx3(&l, &r, &x, &y, &z)).flatten()
    });
    suite.check("add_commutativity", trials, || {
        let (x, y) = (gen_e(), gen_e());
        let l = x.add(&y);
        let r = y.add(&x);
        (l != r).then(|| cx2(&l, &r, &x, &y)).flatten()
    });
    suite.check("scale_annihilators", trials, || {
        let (d, e) = (gen_d(), gen_e());
        let l = E::zero().scale(&d);
        let r = e.scale(&D::zero());
        if l == E::zero() && r == E::zero() {
            None
        } else {
            Some(format!("d={d:?} e={e:?}: d•0={l:?}, 0•e={r:?}"))
        }
    });
    suite.check("scale_distributes_module", trials, || {
        let (d, e1, e2) = (gen_d(), gen_e(), gen_e());
        let l = e1.add(&e2).scale(&d);
        let r = e1.scale(&d).add(&e2.scale(&d));
        (l != r)
            .then(|| Some(format!("d={d:?} e={e1:?} e'={e2:?}: {l:?} != {r:?}")))
            .flatten()
    });
    suite.check("scale_distributes_scalar", trials, || {
        let (d1, d2, e) = (gen_d(), gen_d(), gen_e());
        let l = e.scale(&d1.add(&d2));
        let r = e.scale(&d1).add(&e.scale(&d2));
        (l != r)
            .then(|| Some(format!("d={d1:?} d'={d2:?} e={e:?}: {l:?} != {r:?}")))
            .flatten()
    });
    suite.check("scale_respects_mul", trials, || {
        let (d1, d2, e) = (gen_d(), gen_d(), gen_e());
        let one = e.scale(&D::one());
        let l = e.scale(&d1.mul(&d2));
        let r = e.scale(&d2).scale(&d1);
        if one == e && l == r {
            None
        } else {
            Some(format!("d={d1:?} d'={d2:?} e={e:?}: {l:?} != {r:?}"))
        }
    });

    LawReport { laws: suite.laws }
}
