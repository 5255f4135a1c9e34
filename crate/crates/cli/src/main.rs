//! `adc`: evaluate expressions, differentiate them in any mode, print
//! higher-order derivatives, and run the op-count benchmark.

mod output;
mod scalar;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use adc_core::expr::{
    free_vars, parse, pretty, simplify_basic, RegistryMode, Valuation, VarId, VarRegistry,
};
use adc_core::higher::{hessian_vector, stream_all, take_diag};
use adc_core::modes::{derive, GradMode};
use adc_core::oracle::{scaling_check, Family, ProfiledMode, PROFILE_CSV_HEADER};
use adc_core::tangent::DenseTangent;

use output::{Format, Rendered};
use scalar::CliScalar;

// exit codes
const EXIT_PARSE: u8 = 2;
const EXIT_MISSING_BINDING: u8 = 3;
const EXIT_CAPABILITY: u8 = 4;
const EXIT_BENCH: u8 = 5;

struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn new(code: u8, msg: impl Into<String>) -> Self {
        Failure {
            code,
            msg: msg.into(),
        }
    }
}

impl From<adc_core::UnsupportedPrimitive> for Failure {
    fn from(e: adc_core::UnsupportedPrimitive) -> Self {
        Failure::new(EXIT_CAPABILITY, e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "adc",
    version,
    about = "Automatic differentiation over semirings: evaluation, gradients in five modes, higher-order derivatives, and op-count benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate an expression at a point
    Eval(EvalArgs),
    /// Value and gradient in the chosen mode
    Grad(GradArgs),
    /// Symbolic derivative, simplified and pretty-printed
    Derive(DeriveArgs),
    /// Successive derivatives along one variable
    Higher(HigherArgs),
    /// Hessian-vector product
    Hvp(HvpArgs),
    /// Operation-count benchmark over an expression family (CSV on stdout)
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ScalarTag {
    I64,
    Rational,
    F64,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatTag {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeTag {
    #[value(name = "forward-dense")]
    ForwardDense,
    #[value(name = "forward-sparse")]
    ForwardSparse,
    Reverse,
    #[value(name = "reverse-cayley")]
    ReverseCayley,
    #[value(name = "reverse-mut")]
    ReverseMut,
}

impl From<ModeTag> for GradMode {
    fn from(m: ModeTag) -> GradMode {
        match m {
            ModeTag::ForwardDense => GradMode::ForwardDense,
            ModeTag::ForwardSparse => GradMode::ForwardSparse,
            ModeTag::Reverse => GradMode::Reverse,
            ModeTag::ReverseCayley => GradMode::ReverseCayley,
            ModeTag::ReverseMut => GradMode::ReverseMut,
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Expression, e.g. "x*(x+1)" or "let y = x+x in y*y"
    #[arg(short = 'e', long = "expr")]
    expr: String,

    /// Point bindings: name=value[,name=value]*
    #[arg(short = 'p', long = "point", default_value = "")]
    point: String,

    /// Scalar type for evaluation
    #[arg(long, value_enum, default_value = "i64")]
    scalar: ScalarTag,

    /// Output format
    #[arg(long, value_enum, default_value = "text")]
    format: FormatTag,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct GradArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Differentiation mode
    #[arg(long, value_enum, default_value = "reverse")]
    mode: ModeTag,
}

#[derive(Args)]
struct DeriveArgs {
    /// Expression to differentiate
    #[arg(short = 'e', long = "expr")]
    expr: String,

    /// Variable to differentiate with respect to
    #[arg(long = "var")]
    var: String,

    #[arg(long, value_enum, default_value = "text")]
    format: FormatTag,
}

#[derive(Args)]
struct HigherArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Variable whose successive derivatives to print
    #[arg(long = "var")]
    var: String,

    /// Highest derivative order
    #[arg(long, default_value_t = 2)]
    depth: usize,
}

#[derive(Args)]
struct HvpArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Direction vector bindings: name=value[,name=value]*; unmentioned
    /// variables get zero
    #[arg(long = "vec", default_value = "")]
    vec: String,
}

#[derive(Args)]
struct BenchArgs {
    /// Expression family: sum | chain | product-tree
    #[arg(long)]
    family: String,

    /// Mode to profile: a gradient mode or "symbolic"
    #[arg(long)]
    mode: String,

    /// Size points: `N:V[,N:V]*`
    #[arg(long)]
    sizes: String,

    /// Also print the best-fit growth law on stderr (needs >= 4 points)
    #[arg(long, default_value_t = false)]
    fit: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // backward passes and symbolic derivatives recurse one frame per
    // expression node; a large worker stack keeps very deep inputs viable
    std::thread::Builder::new()
        .stack_size(512 << 20)
        .spawn(move || run_command(cli))
        .expect("failed to spawn worker thread")
        .join()
        .unwrap_or(ExitCode::FAILURE)
}

fn run_command(cli: Cli) -> ExitCode {
    let result = match cli.cmd {
        Cmd::Eval(a) => dispatch_eval(a),
        Cmd::Grad(a) => dispatch_grad(a),
        Cmd::Derive(a) => run_derive(a),
        Cmd::Higher(a) => dispatch_higher(a),
        Cmd::Hvp(a) => dispatch_hvp(a),
        Cmd::Bench(a) => run_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

/// Parses the expression and resolves the point bindings against its
/// registry; every free variable must be bound.
fn parse_request<D: CliScalar>(
    expr: &str,
    point: &str,
) -> Result<(std::sync::Arc<adc_core::Expr>, VarRegistry, Valuation<D>), Failure> {
    let (e, registry) = parse(expr, RegistryMode::Grow)
        .map_err(|pe| Failure::new(EXIT_PARSE, pe.to_string()))?;
    let bindings = parse_bindings::<D>(point, &registry)?;
    let free = free_vars(&e);
    for v in &free {
        if bindings.iter().all(|(bv, _)| bv != v) {
            return Err(Failure::new(
                EXIT_MISSING_BINDING,
                format!("missing binding for variable `{}`", registry.name_of(*v)),
            ));
        }
    }
    let var = Valuation::from_bindings(&registry, D::zero(), bindings);
    Ok((e, registry, var))
}

fn parse_bindings<D: CliScalar>(
    point: &str,
    registry: &VarRegistry,
) -> Result<Vec<(VarId, D)>, Failure> {
    let mut out = Vec::new();
    for item in point.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, value) = item.split_once('=').ok_or_else(|| {
            Failure::new(EXIT_PARSE, format!("malformed binding `{item}`, expected name=value"))
        })?;
        let v = registry.lookup(name.trim()).ok_or_else(|| {
            Failure::new(
                EXIT_MISSING_BINDING,
                format!("binding for unknown variable `{}`", name.trim()),
            )
        })?;
        let d = D::parse_scalar(value.trim())
            .map_err(|m| Failure::new(EXIT_PARSE, format!("invalid value `{}`: {m}", value.trim())))?;
        out.push((v, d));
    }
    Ok(out)
}

fn dispatch_eval(a: EvalArgs) -> Result<(), Failure> {
    match a.common.scalar {
        ScalarTag::I64 => run_eval::<i64>(&a.common),
        ScalarTag::Rational => run_eval::<adc_core::algebra::Rational>(&a.common),
        ScalarTag::F64 => run_eval::<f64>(&a.common),
    }
}

fn run_eval<D: CliScalar>(common: &CommonArgs) -> Result<(), Failure> {
    let (e, _, var) = parse_request::<D>(&common.expr, &common.point)?;
    let value = adc_core::eval::eval_at(&var, &e)?;
    Rendered::value(value).print(Format::from(common.format));
    Ok(())
}

fn dispatch_grad(a: GradArgs) -> Result<(), Failure> {
    match a.common.scalar {
        ScalarTag::I64 => run_grad::<i64>(&a.common, a.mode.into()),
        ScalarTag::Rational => run_grad::<adc_core::algebra::Rational>(&a.common, a.mode.into()),
        ScalarTag::F64 => run_grad::<f64>(&a.common, a.mode.into()),
    }
}

fn run_grad<D: CliScalar>(common: &CommonArgs, mode: GradMode) -> Result<(), Failure> {
    let (e, registry, var) = parse_request::<D>(&common.expr, &common.point)?;
    let (value, gradient) = mode.run(&var, &e)?;
    let free = free_vars(&e);
    let components = free
        .iter()
        .map(|v| {
            let d = gradient.get(*v).cloned().unwrap_or_else(D::zero);
            (registry.name_of(*v).to_string(), d)
        })
        .collect();
    Rendered::gradient(value, components).print(Format::from(common.format));
    Ok(())
}

fn run_derive(a: DeriveArgs) -> Result<(), Failure> {
    let (e, registry) =
        parse(&a.expr, RegistryMode::Grow).map_err(|pe| Failure::new(EXIT_PARSE, pe.to_string()))?;
    let x = registry.lookup(&a.var).ok_or_else(|| {
        Failure::new(
            EXIT_MISSING_BINDING,
            format!("unknown variable `{}`", a.var),
        )
    })?;
    let d = simplify_basic(&derive(x, &e));
    Rendered::derivative(pretty(&d, &registry)).print(Format::from(a.format));
    Ok(())
}

fn dispatch_higher(a: HigherArgs) -> Result<(), Failure> {
    match a.common.scalar {
        ScalarTag::I64 => run_higher::<i64>(&a),
        ScalarTag::Rational => run_higher::<adc_core::algebra::Rational>(&a),
        ScalarTag::F64 => run_higher::<f64>(&a),
    }
}

fn run_higher<D: CliScalar>(a: &HigherArgs) -> Result<(), Failure> {
    let (e, registry, var) = parse_request::<D>(&a.common.expr, &a.common.point)?;
    let x = registry.lookup(&a.var).ok_or_else(|| {
        Failure::new(
            EXIT_MISSING_BINDING,
            format!("unknown variable `{}`", a.var),
        )
    })?;
    let stream = stream_all(&var, &e)?;
    let diag = take_diag(&stream, x, a.depth);
    Rendered::diagonal(diag).print(Format::from(a.common.format));
    Ok(())
}

fn dispatch_hvp(a: HvpArgs) -> Result<(), Failure> {
    match a.common.scalar {
        ScalarTag::I64 => run_hvp::<i64>(&a),
        ScalarTag::Rational => run_hvp::<adc_core::algebra::Rational>(&a),
        ScalarTag::F64 => run_hvp::<f64>(&a),
    }
}

fn run_hvp<D: CliScalar>(a: &HvpArgs) -> Result<(), Failure> {
    let (e, registry, var) = parse_request::<D>(&a.common.expr, &a.common.point)?;
    let vec_bindings = parse_bindings::<D>(&a.vec, &registry)?;
    let direction = Valuation::from_bindings(&registry, D::zero(), vec_bindings);
    let v = DenseTangent::from_fn(registry.arity(), |i| direction.get(i).clone());
    let value = adc_core::eval::eval_at(&var, &e)?;
    let hv = hessian_vector(&var, &e, &v)?;
    let free = free_vars(&e);
    let components = free
        .iter()
        .map(|w| (registry.name_of(*w).to_string(), hv.component(*w)))
        .collect();
    Rendered::hessian_vector(value, components).print(Format::from(a.common.format));
    Ok(())
}

fn run_bench(a: BenchArgs) -> Result<(), Failure> {
    let family = Family::from_name(&a.family)
        .ok_or_else(|| Failure::new(EXIT_BENCH, format!("invalid family `{}`", a.family)))?;
    let mode = ProfiledMode::from_name(&a.mode)
        .ok_or_else(|| Failure::new(EXIT_BENCH, format!("invalid mode `{}`", a.mode)))?;
    let mut sizes = Vec::new();
    for item in a.sizes.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (n, v) = item
            .split_once(':')
            .ok_or_else(|| Failure::new(EXIT_BENCH, format!("invalid size `{item}`, expected N:V")))?;
        let n: usize = n
            .trim()
            .parse()
            .map_err(|_| Failure::new(EXIT_BENCH, format!("invalid N in `{item}`")))?;
        let v: usize = v
            .trim()
            .parse()
            .map_err(|_| Failure::new(EXIT_BENCH, format!("invalid V in `{item}`")))?;
        if n == 0 || v == 0 {
            return Err(Failure::new(EXIT_BENCH, format!("sizes must be positive in `{item}`")));
        }
        sizes.push((n, v));
    }
    if sizes.is_empty() {
        return Err(Failure::new(EXIT_BENCH, "no size points given"));
    }

    println!("{PROFILE_CSV_HEADER}");
    for &(n, v) in &sizes {
        let profile = adc_core::oracle::profile_mode(mode, family, n, v);
        println!("{}", profile.csv_row());
    }
    if a.fit {
        let report = scaling_check(mode, family, &sizes)
            .map_err(|m| Failure::new(EXIT_BENCH, m))?;
        eprintln!("best fit: {}", report.verdict.name());
    }
    Ok(())
}
