//! Independent ground truth: finite differences, the naive symbolic
//! pipeline, a seeded expression generator, and operation-count profiling
//! with asymptotic fits.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::counter::scoped_counter;
use crate::algebra::{Counted, Monoid, OpCounts, Semiring, UnsupportedPrimitive};
use crate::eval::eval_at;
use crate::expr::{free_vars, Expr, VarId, VarRegistry, Valuation};
use crate::modes::{derive, forward_dense, symbolic, GradMode};
use crate::tangent::{DenseTangent, SparseTangent};

/// Central-difference gradient: component `v` is
/// `(f(x + h·e_v) − f(x − h·e_v)) / 2h`.
pub fn finite_diff_grad(
    var: &Valuation<f64>,
    e: &Expr,
    h: f64,
) -> Result<DenseTangent<f64>, UnsupportedPrimitive> {
    assert!(h > 0.0);
    let arity = var.arity();
    let base: Vec<f64> = (0..arity as u32).map(|i| *var.get(VarId(i))).collect();
    let mut out = Vec::with_capacity(arity);
    for i in 0..arity {
        let mut hi = base.clone();
        let mut lo = base.clone();
        hi[i] += h;
        lo[i] -= h;
        let fhi = eval_at(&Valuation::new(hi), e)?;
        let flo = eval_at(&Valuation::new(lo), e)?;
        out.push((fhi - flo) / (2.0 * h));
    }
    Ok(DenseTangent::new(out))
}

/// The naive two-pass pipeline used as the master oracle: symbolically
/// derive with respect to each free variable and evaluate.
pub fn brute_force_grad<D>(
    var: &Valuation<D>,
    e: &Expr,
) -> Result<SparseTangent<D>, UnsupportedPrimitive>
where
    D: Semiring + PartialEq,
{
    let zero = D::zero();
    let mut entries = Vec::new();
    for v in free_vars(e) {
        let d = eval_at(var, &derive(v, e))?;
        if d != zero {
            entries.push((v, d));
        }
    }
    Ok(SparseTangent::from_sorted(entries))
}

/// The literal three-pass second-order specification: differentiate
/// symbolically via dense forward mode at the free semiring, twice, then
/// evaluate the resulting expression at the point.
pub fn derive_2nd_three_pass<D: Semiring>(
    var: &Valuation<D>,
    e: &Expr,
    first: VarId,
    second: VarId,
) -> Result<D, UnsupportedPrimitive> {
    let arity = var.arity();
    let sym: Valuation<Expr> =
        Valuation::new((0..arity as u32).map(|i| Expr::Var(VarId(i))).collect());
    let pass1 = forward_dense(&sym, e)?;
    let de = pass1.tangent.component(first);
    let pass2 = forward_dense(&sym, &de)?;
    let d2e = pass2.tangent.component(second);
    eval_at(var, &d2e)
}

/// Replaces every `let` by capture-free substitution, bottom-up: the
/// reference semantics for let-aware differentiation.
pub fn inline_lets(e: &Expr) -> Arc<Expr> {
    fn subst(e: &Expr, y: VarId, with: &Arc<Expr>) -> Arc<Expr> {
        // `e` and `with` are let-free here, so no capture is possible
        match e {
            Expr::Var(v) if *v == y => with.clone(),
            Expr::Var(_) | Expr::Zero | Expr::One => Arc::new(e.clone()),
            Expr::Plus(a, b) => Expr::plus(subst(a, y, with), subst(b, y, with)),
            Expr::Times(a, b) => Expr::times(subst(a, y, with), subst(b, y, with)),
            Expr::Neg(a) => Arc::new(Expr::Neg(subst(a, y, with))),
            Expr::Sin(a) => Arc::new(Expr::Sin(subst(a, y, with))),
            Expr::Cos(a) => Arc::new(Expr::Cos(subst(a, y, with))),
            Expr::Let(..) => unreachable!("operand of subst contains a let"),
        }
    }
    match e {
        Expr::Var(_) | Expr::Zero | Expr::One => Arc::new(e.clone()),
        Expr::Plus(a, b) => Expr::plus(inline_lets(a), inline_lets(b)),
        Expr::Times(a, b) => Expr::times(inline_lets(a), inline_lets(b)),
        Expr::Neg(a) => Arc::new(Expr::Neg(inline_lets(a))),
        Expr::Sin(a) => Arc::new(Expr::Sin(inline_lets(a))),
        Expr::Cos(a) => Arc::new(Expr::Cos(inline_lets(a))),
        Expr::Let(y, e1, e2) => {
            let bound = inline_lets(e1);
            let body = inline_lets(e2);
            subst(&body, *y, &bound)
        }
    }
}

/// Evaluates over floats while tracking the largest intermediate magnitude,
/// for conditioning filters.
pub fn eval_peak_magnitude(
    var: &Valuation<f64>,
    e: &Expr,
) -> Result<(f64, f64), UnsupportedPrimitive> {
    #[derive(Clone, Debug, PartialEq)]
    struct Peak {
        v: f64,
        peak: f64,
    }

    impl Peak {
        fn of(v: f64, peaks: &[&Peak]) -> Peak {
            let peak = peaks
                .iter()
                .map(|p| p.peak)
                .fold(v.abs(), f64::max);
            Peak { v, peak }
        }
    }

    impl Monoid for Peak {
        fn zero() -> Self {
            Peak { v: 0.0, peak: 0.0 }
        }
        fn add(&self, rhs: &Self) -> Self {
            Peak::of(self.v + rhs.v, &[self, rhs])
        }
    }

    impl Semiring for Peak {
        fn one() -> Self {
            Peak { v: 1.0, peak: 1.0 }
        }
        fn mul(&self, rhs: &Self) -> Self {
            Peak::of(self.v * rhs.v, &[self, rhs])
        }
        fn neg(&self) -> Result<Self, UnsupportedPrimitive> {
            Ok(Peak::of(-self.v, &[self]))
        }
        fn sin(&self) -> Result<Self, UnsupportedPrimitive> {
            Ok(Peak::of(self.v.sin(), &[self]))
        }
        fn cos(&self) -> Result<Self, UnsupportedPrimitive> {
            Ok(Peak::of(self.v.cos(), &[self]))
        }
    }

    let lifted: Valuation<Peak> = Valuation::new(
        (0..var.arity() as u32)
            .map(|i| {
                let v = *var.get(VarId(i));
                Peak { v, peak: v.abs() }
            })
            .collect(),
    );
    let out = eval_at(&lifted, e)?;
    Ok((out.v, out.peak))
}

/// Node-kind weights for the random expression generator.
#[derive(Debug, Clone, Copy)]
pub struct NodeWeights {
    pub var: u32,
    pub zero: u32,
    pub one: u32,
    pub plus: u32,
    pub times: u32,
    pub neg: u32,
    pub sin: u32,
    pub cos: u32,
}

impl Default for NodeWeights {
    fn default() -> Self {
        NodeWeights {
            var: 6,
            zero: 1,
            one: 3,
            plus: 6,
            times: 6,
            neg: 2,
            sin: 1,
            cos: 1,
        }
    }
}

/// Configuration for [`gen_expr`]. Generation is deterministic in `seed`
/// and never exceeds `max_nodes` AST nodes.
#[derive(Debug, Clone)]
pub struct ExprGenConfig {
    pub seed: u64,
    pub max_nodes: usize,
    pub num_vars: usize,
    pub weights: NodeWeights,
    pub trig_enabled: bool,
    /// Probability that an internal node becomes a `let`; binders are drawn
    /// from the same registry, so shadowing occurs naturally.
    pub let_probability: f64,
}

impl Default for ExprGenConfig {
    fn default() -> Self {
        ExprGenConfig {
            seed: 0,
            max_nodes: 50,
            num_vars: 2,
            weights: NodeWeights::default(),
            trig_enabled: false,
            let_probability: 0.0,
        }
    }
}

/// Deterministic pseudo-random expression over variables `0..num_vars`.
pub fn gen_expr(config: &ExprGenConfig) -> Arc<Expr> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    gen_node(&mut rng, config, config.max_nodes)
}

fn gen_node(rng: &mut ChaCha8Rng, cfg: &ExprGenConfig, budget: usize) -> Arc<Expr> {
    let w = &cfg.weights;
    if budget <= 1 {
        let total = (w.var + w.zero + w.one).max(1);
        let mut pick = rng.gen_range(0..total);
        if pick < w.var && cfg.num_vars > 0 {
            return Expr::var(VarId(rng.gen_range(0..cfg.num_vars as u32)));
        }
        pick = pick.saturating_sub(w.var);
        if pick < w.zero {
            return Arc::new(Expr::Zero);
        }
        return Arc::new(Expr::One);
    }

    // a binary node needs a budget of at least 3 (itself plus two children)
    if budget == 2 {
        let trig = if cfg.trig_enabled { w.sin + w.cos } else { 0 };
        let total = w.neg + trig;
        if total == 0 {
            return gen_node(rng, cfg, 1);
        }
        let pick = rng.gen_range(0..total);
        let inner = gen_node(rng, cfg, 1);
        return if pick < w.neg {
            Arc::new(Expr::Neg(inner))
        } else if pick < w.neg + w.sin {
            Arc::new(Expr::Sin(inner))
        } else {
            Arc::new(Expr::Cos(inner))
        };
    }

    if budget >= 5 && cfg.num_vars > 0 && rng.gen_bool(cfg.let_probability) {
        let y = VarId(rng.gen_range(0..cfg.num_vars as u32));
        let inner = budget - 1;
        let left = rng.gen_range(1..inner);
        let bound = gen_node(rng, cfg, left);
        let body = gen_node(rng, cfg, inner - left);
        return Arc::new(Expr::Let(y, bound, body));
    }

    let trig = if cfg.trig_enabled { w.sin + w.cos } else { 0 };
    let total = (w.plus + w.times + w.neg + trig).max(1);
    let mut pick = rng.gen_range(0..total);
    if pick < w.plus + w.times {
        let inner = budget - 1;
        let left = rng.gen_range(1..inner);
        let a = gen_node(rng, cfg, left);
        let b = gen_node(rng, cfg, inner - left);
        return if pick < w.plus {
            Expr::plus(a, b)
        } else {
            Expr::times(a, b)
        };
    }
    pick -= w.plus + w.times;
    let inner = gen_node(rng, cfg, budget - 1);
    if pick < w.neg {
        Arc::new(Expr::Neg(inner))
    } else if pick < w.neg + w.sin {
        Arc::new(Expr::Sin(inner))
    } else {
        Arc::new(Expr::Cos(inner))
    }
}

/// Expression families with known asymptotics, for the complexity bench.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Left-leaning sum cycling over all variables.
    Sum,
    /// Nested products of a single variable.
    Chain,
    /// Balanced product tree with leaves cycling over all variables.
    ProductTree,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Sum, Family::Chain, Family::ProductTree];

    pub fn name(self) -> &'static str {
        match self {
            Family::Sum => "sum",
            Family::Chain => "chain",
            Family::ProductTree => "product-tree",
        }
    }

    pub fn from_name(name: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.name() == name)
    }

    /// Builds a family member with at most `n` nodes over `v` variables,
    /// together with its registry.
    pub fn build(self, n: usize, v: usize) -> (Arc<Expr>, VarRegistry) {
        assert!(n >= 1 && v >= 1);
        let registry = VarRegistry::from_names((0..v).map(|i| format!("x{i}")));
        let expr = match self {
            Family::Sum => {
                let mut e = Expr::var(VarId(0));
                let mut count = 1;
                let mut i = 1u32;
                while count + 2 <= n {
                    e = Expr::plus(e, Expr::var(VarId(i % v as u32)));
                    count += 2;
                    i += 1;
                }
                e
            }
            Family::Chain => {
                let mut e = Expr::var(VarId(0));
                let mut count = 1;
                while count + 2 <= n {
                    e = Expr::times(e, Expr::var(VarId(0)));
                    count += 2;
                }
                e
            }
            Family::ProductTree => {
                let leaves = n.div_ceil(2).max(1);
                fn balance(lo: u32, hi: u32, v: u32) -> Arc<Expr> {
                    if hi - lo == 1 {
                        Expr::var(VarId(lo % v))
                    } else {
                        let mid = lo + (hi - lo) / 2;
                        Expr::times(balance(lo, mid, v), balance(mid, hi, v))
                    }
                }
                balance(0, leaves as u32, v as u32)
            }
        };
        (expr, registry)
    }
}

/// What to profile: a gradient mode, or the symbolic pipeline (derive at
/// dual numbers over the free semiring, then evaluate the derivative).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfiledMode {
    Grad(GradMode),
    Symbolic,
}

impl ProfiledMode {
    pub const ALL: [ProfiledMode; 6] = [
        ProfiledMode::Grad(GradMode::ForwardDense),
        ProfiledMode::Grad(GradMode::ForwardSparse),
        ProfiledMode::Grad(GradMode::Reverse),
        ProfiledMode::Grad(GradMode::ReverseCayley),
        ProfiledMode::Grad(GradMode::ReverseMut),
        ProfiledMode::Symbolic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProfiledMode::Grad(m) => m.name(),
            ProfiledMode::Symbolic => "symbolic",
        }
    }

    pub fn from_name(name: &str) -> Option<ProfiledMode> {
        ProfiledMode::ALL.into_iter().find(|m| m.name() == name)
    }
}

/// Operation counts for one mode on one family member.
#[derive(Debug, Clone)]
pub struct OpProfile {
    pub mode: ProfiledMode,
    pub family: Family,
    pub n: usize,
    pub v: usize,
    pub counts: OpCounts,
}

pub const PROFILE_CSV_HEADER: &str = "mode,family,N,V,adds,muls,scales,deltas,touches";

impl OpProfile {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.mode.name(),
            self.family.name(),
            self.n,
            self.v,
            self.counts.adds,
            self.counts.muls,
            self.counts.scales,
            self.counts.deltas,
            self.counts.touches
        )
    }
}

/// Runs `mode` on the `family` member of size `(n, v)` with counting
/// scalars at the all-ones point and snapshots the counters. The gradient
/// extraction (the backward pass, where there is one) is counted.
pub fn profile_mode(mode: ProfiledMode, family: Family, n: usize, v: usize) -> OpProfile {
    // backward passes of the function-based representations nest one stack
    // frame per node, so deep benchmark families need a large stack; the
    // per-run counter is thread-local, so the whole run moves to the
    // worker thread
    std::thread::Builder::new()
        .name(format!("profile-{}", mode.name()))
        .stack_size(512 << 20)
        .spawn(move || profile_mode_here(mode, family, n, v))
        .expect("failed to spawn profiling thread")
        .join()
        .expect("profiling run panicked")
}

fn profile_mode_here(mode: ProfiledMode, family: Family, n: usize, v: usize) -> OpProfile {
    let (e, registry) = family.build(n, v);
    let arity = registry.arity();
    let counts = match mode {
        ProfiledMode::Grad(grad) => {
            let var: Valuation<Counted<i64>> = Valuation::constant(arity, Counted(1));
            let ((), counts) = scoped_counter(|| {
                let (_, gradient) = grad.run(&var, &e).expect("integer gradients cannot fail");
                std::hint::black_box(gradient);
            });
            counts
        }
        ProfiledMode::Symbolic => {
            let ((), counts) = scoped_counter(|| {
                let dual = symbolic(VarId(0), &e).expect("symbolic evaluation cannot fail");
                let var: Valuation<Counted<i64>> = Valuation::constant(arity, Counted(1));
                let d = eval_at(&var, &dual.tangent).expect("integer evaluation cannot fail");
                std::hint::black_box(d);
            });
            counts
        }
    };
    OpProfile {
        mode,
        family,
        n,
        v,
        counts,
    }
}

/// Candidate asymptotic growth laws for counter totals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthLaw {
    NTimesV,
    NTimesLogV,
    NPlusV,
}

impl GrowthLaw {
    pub const ALL: [GrowthLaw; 3] = [
        GrowthLaw::NTimesV,
        GrowthLaw::NTimesLogV,
        GrowthLaw::NPlusV,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GrowthLaw::NTimesV => "N*V",
            GrowthLaw::NTimesLogV => "N*logV",
            GrowthLaw::NPlusV => "N+V",
        }
    }

    fn value(self, n: usize, v: usize) -> f64 {
        let (n, v) = (n as f64, v as f64);
        match self {
            GrowthLaw::NTimesV => n * v,
            GrowthLaw::NTimesLogV => n * (v.log2().max(1.0)),
            GrowthLaw::NPlusV => n + v,
        }
    }
}

/// Profiles, per-law residuals and the best-fit verdict of one scaling run.
#[derive(Debug, Clone)]
pub struct ScalingReport {
    pub profiles: Vec<OpProfile>,
    /// Sum of squared log-residuals per candidate law.
    pub residuals: Vec<(GrowthLaw, f64)>,
    pub verdict: GrowthLaw,
}

/// Fits counter totals across `sizes` against the candidate growth laws by
/// least squares on log-transformed counts; the verdict is the law with the
/// smallest residual. Needs at least four size points.
pub fn scaling_check(
    mode: ProfiledMode,
    family: Family,
    sizes: &[(usize, usize)],
) -> Result<ScalingReport, String> {
    if sizes.len() < 4 {
        return Err(format!(
            "insufficient size points: need at least 4, got {}",
            sizes.len()
        ));
    }
    let profiles: Vec<OpProfile> = sizes
        .iter()
        .map(|&(n, v)| profile_mode(mode, family, n, v))
        .collect();

    let mut residuals = Vec::new();
    for law in GrowthLaw::ALL {
        let logs: Vec<f64> = profiles
            .iter()
            .map(|p| {
                let total = p.counts.total().max(1) as f64;
                total.ln() - law.value(p.n, p.v).ln()
            })
            .collect();
        let mean = logs.iter().sum::<f64>() / logs.len() as f64;
        let ss = logs.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>();
        residuals.push((law, ss));
    }
    let verdict = residuals
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
        .0;
    Ok(ScalingReport {
        profiles,
        residuals,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, RegistryMode};

    #[test]
    fn finite_diff_example1() {
        let (e, _) = parse("x*(x+1)", RegistryMode::Grow).unwrap();
        let var = Valuation::new(vec![5.0]);
        let g = finite_diff_grad(&var, &e, 1e-5).unwrap();
        assert!((g.component(VarId(0)) - 11.0).abs() < 1e-6);
    }

    #[test]
    fn finite_diff_constant_and_trig() {
        let (e, _) = parse("3", RegistryMode::Grow).unwrap();
        let var = Valuation::new(vec![1.0]);
        let g = finite_diff_grad(&var, &e, 1e-5).unwrap();
        assert!(g.component(VarId(0)).abs() < 1e-9);

        // d/dx sin(x*x) = 2x cos(x*x); at x = 1 that is 2 cos 1
        let (e, _) = parse("sin(x*x)", RegistryMode::Grow).unwrap();
        let g = finite_diff_grad(&var, &e, 1e-5).unwrap();
        assert!((g.component(VarId(0)) - 1.0806046117362795).abs() < 1e-6);
    }

    #[test]
    fn brute_force_examples() {
        let (e, reg) = parse("x*y + x + 1", RegistryMode::Grow).unwrap();
        let var = Valuation::new(vec![5i64, 3]);
        let g = brute_force_grad(&var, &e).unwrap();
        let x = reg.lookup("x").unwrap();
        let y = reg.lookup("y").unwrap();
        assert_eq!(g.entries(), &[(x, 4), (y, 5)]);

        let (e3, _) = parse("x*((x+1)*(x+x))", RegistryMode::Grow).unwrap();
        let var = Valuation::new(vec![5i64]);
        let g = brute_force_grad(&var, &e3).unwrap();
        assert_eq!(g.entries(), &[(VarId(0), 170)]);

        let (c, _) = parse("1+1", RegistryMode::Grow).unwrap();
        let var: Valuation<i64> = Valuation::new(vec![]);
        assert!(brute_force_grad(&var, &c).unwrap().is_empty());
    }

    #[test]
    fn gen_expr_is_deterministic_and_bounded() {
        let cfg = ExprGenConfig {
            seed: 42,
            max_nodes: 60,
            num_vars: 4,
            trig_enabled: true,
            let_probability: 0.15,
            ..ExprGenConfig::default()
        };
        let a = gen_expr(&cfg);
        let b = gen_expr(&cfg);
        assert_eq!(a, b);
        assert!(a.node_count() <= 60);
    }

    #[test]
    fn gen_expr_single_node_is_leaf() {
        let cfg = ExprGenConfig {
            seed: 3,
            max_nodes: 1,
            num_vars: 2,
            ..ExprGenConfig::default()
        };
        let e = gen_expr(&cfg);
        assert!(matches!(
            *e,
            Expr::Var(_) | Expr::Zero | Expr::One
        ));
    }

    #[test]
    fn gen_expr_respects_max_nodes_across_seeds() {
        for seed in 0..10_000 {
            let cfg = ExprGenConfig {
                seed,
                max_nodes: 25,
                num_vars: 3,
                trig_enabled: seed % 2 == 0,
                let_probability: 0.2,
                ..ExprGenConfig::default()
            };
            let n = gen_expr(&cfg).node_count();
            assert!(n <= 25, "seed {seed} produced {n} nodes");
        }
    }

    #[test]
    fn inline_lets_matches_env_semantics() {
        let (e, reg) = parse("let y = x+x in y*y", RegistryMode::Grow).unwrap();
        let inlined = inline_lets(&e);
        assert!(!format!("{inlined:?}").contains("Let"));
        let x = reg.lookup("x").unwrap();
        let var = Valuation::from_bindings(&reg, 0i64, [(x, 5)]);
        assert_eq!(eval_at(&var, &inlined), eval_at(&var, &e));
        assert_eq!(eval_at(&var, &inlined), Ok(100));
    }

    #[test]
    fn inline_lets_shadowing() {
        let (e, _) = parse("let x = x+1 in x*x", RegistryMode::Grow).unwrap();
        let inlined = inline_lets(&e);
        let var = Valuation::new(vec![2i64]);
        assert_eq!(eval_at(&var, &inlined), Ok(9));
    }

    #[test]
    fn peak_magnitude_tracks_intermediates() {
        // (x*x)*0 has peak |x*x| even though the value is 0
        let (e, _) = parse("x*x*0", RegistryMode::Grow).unwrap();
        let var = Valuation::new(vec![1000.0]);
        let (v, peak) = eval_peak_magnitude(&var, &e).unwrap();
        assert_eq!(v, 0.0);
        assert!(peak >= 1_000_000.0);
    }

    #[test]
    fn families_have_requested_sizes() {
        for family in Family::ALL {
            for (n, v) in [(33, 4), (65, 8), (129, 16)] {
                let (e, reg) = family.build(n, v);
                assert!(e.node_count() <= n, "{} ({n},{v})", family.name());
                assert!(e.node_count() >= n - 2, "{} ({n},{v})", family.name());
                assert_eq!(reg.arity(), v);
            }
        }
    }

    #[test]
    fn profile_is_value_transparent() {
        let profile = profile_mode(
            ProfiledMode::Grad(GradMode::ReverseMut),
            Family::Sum,
            65,
            8,
        );
        assert!(profile.counts.total() > 0);

        // profiled gradient equals the unprofiled gradient
        let (e, reg) = Family::Sum.build(65, 8);
        let var: Valuation<i64> = Valuation::constant(reg.arity(), 1);
        let (value, grad) = GradMode::ReverseMut.run(&var, &e).unwrap();
        let counted: Valuation<Counted<i64>> = Valuation::constant(reg.arity(), Counted(1));
        let (cvalue, cgrad) = GradMode::ReverseMut.run(&counted, &e).unwrap();
        assert_eq!(cvalue.0, value);
        assert_eq!(
            cgrad
                .entries()
                .iter()
                .map(|(v, d)| (*v, d.0))
                .collect::<Vec<_>>(),
            grad.entries().to_vec()
        );
    }

    #[test]
    fn profile_golden_counts_sum_family() {
        // frozen counts for the sum family at (65, 8): 33 leaves, 32 plus
        // nodes. Dense tangent adds are (V+1) per plus node; the mutable
        // tape touches two cells per leaf plus 3V for setup and sweep.
        let p = profile_mode(ProfiledMode::Grad(GradMode::ForwardDense), Family::Sum, 65, 8);
        assert_eq!(
            (p.counts.adds, p.counts.muls, p.counts.deltas, p.counts.touches),
            (288, 0, 33, 1032)
        );

        let p = profile_mode(ProfiledMode::Grad(GradMode::ReverseMut), Family::Sum, 65, 8);
        assert_eq!(
            (p.counts.adds, p.counts.muls, p.counts.deltas, p.counts.touches),
            (65, 0, 33, 90)
        );

        let p = profile_mode(
            ProfiledMode::Grad(GradMode::ReverseCayley),
            Family::Sum,
            65,
            8,
        );
        assert_eq!(
            (p.counts.adds, p.counts.deltas, p.counts.touches),
            (57, 33, 183)
        );
    }

    #[test]
    fn primal_work_is_shared_by_every_mode() {
        // the primal computation of abstract differentiation is plain
        // evaluation; every mode carries that same baseline
        for family in Family::ALL {
            let (e, reg) = family.build(33, 4);
            let arity = reg.arity();
            let var: Valuation<Counted<i64>> = Valuation::constant(arity, Counted(1));
            let (value, baseline) = scoped_counter(|| eval_at(&var, &e).unwrap());
            for mode in GradMode::ALL {
                let ((mode_value, _), counts) =
                    scoped_counter(|| mode.run(&var, &e).unwrap());
                assert_eq!(mode_value, value, "{} on {}", mode.name(), family.name());
                assert!(
                    counts.adds >= baseline.adds && counts.muls >= baseline.muls,
                    "{} on {} dropped below the shared primal work",
                    mode.name(),
                    family.name()
                );
            }
        }
    }

    #[test]
    fn symbolic_profile_grows_superlinearly_on_chain() {
        // informational only: there is no canonical cost model for
        // symbolic terms, so assert just that work per node grows with N
        let small = profile_mode(ProfiledMode::Symbolic, Family::Chain, 65, 1);
        let large = profile_mode(ProfiledMode::Symbolic, Family::Chain, 257, 1);
        let per_node_small = small.counts.total() as f64 / 65.0;
        let per_node_large = large.counts.total() as f64 / 257.0;
        assert!(per_node_large > 1.5 * per_node_small);
    }

    #[test]
    fn deep_chain_profiles_run_to_completion() {
        // one stack frame per node during the backward pass: the worker
        // stack must absorb 50k levels even in debug builds
        let p = profile_mode(
            ProfiledMode::Grad(GradMode::Reverse),
            Family::Chain,
            50_001,
            1,
        );
        assert_eq!(p.counts.muls, 75_000);
        assert_eq!(p.counts.deltas, 25_001);
    }

    #[test]
    fn scaling_check_requires_enough_points() {
        let err = scaling_check(
            ProfiledMode::Grad(GradMode::ForwardDense),
            Family::Sum,
            &[(33, 4), (65, 8)],
        )
        .unwrap_err();
        assert!(err.contains("insufficient"));
    }
}
