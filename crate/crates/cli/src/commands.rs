use std::fmt::Write as _;
use std::fs::File;

use confreg::fieldsim::{
    estimate_fwer, reject_set_from_mean, run_threshold_comparison, ExperimentGrid, ExperimentMethod,
    ThresholdPlan, TorusFieldConfig,
};
use confreg::resampling::{
    resampled_expectation, scheme_constants, Accuracy, ConstantName, EngineConfig, ResamplingConstants,
    SchemeSpec, WeightScheme, DEFAULT_SUPPORT_CAP,
};
use confreg::thresholds::{
    bonferroni_threshold, compound_threshold, conc_bounded_thresholds, conc_gaussian_threshold,
    quantile_chain_threshold, single_test_threshold, BoundedAssumption, CompoundBranch, Direction,
    LevelSpec, McMeta, Method, Sided, TrailingBound,
};
use confreg::{MeanVector, PhiFunction, PhiKind, Sample, ThresholdReport};

use crate::config::{ConstantsConfig, FwerConfig, RunConfig, SimulateConfig, ThresholdConfig};
use crate::error::CliError;

/// Monte Carlo draws used when `draws = 0` and the support is too large to enumerate.
pub const AUTO_DRAWS: usize = 1000;

pub const THRESHOLD_COLUMNS: &str = "method,direction,value,alpha,delta,alphas,guaranteed_level,n,k,phi,scheme,sigma_norm,sigma_plug_in,engine_draws,seed,mc_stderr,branch,rejected";
pub const SIMULATE_COLUMNS: &str = "b,method,mean,sd,engine_draws,seed,engine_stderr";
pub const FWER_COLUMNS: &str = "m,n,b,method,trials,rate,stderr,exceedance,exceedance_stderr,mean_threshold";
pub const CONSTANTS_COLUMNS: &str = "scheme,n,A,B,C,D,C_over_B,complexity,accuracy";

/// Runs a resolved configuration and returns the full CSV, header included.
pub fn execute(cfg: &RunConfig) -> Result<String, CliError> {
    let body = match cfg {
        RunConfig::Threshold(c) => threshold(c)?,
        RunConfig::Simulate(c) => simulate(c)?,
        RunConfig::Fwer(c) => fwer(c)?,
        RunConfig::Constants(c) => constants(c)?,
    };
    Ok(cfg.header()? + &body)
}

fn opt<T: std::fmt::Display>(x: Option<T>) -> String {
    x.map_or(String::new(), |v| v.to_string())
}

fn join<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn parse_methods<M: std::str::FromStr<Err = confreg::Error>>(names: &[String]) -> Result<Vec<M>, CliError> {
    if names.is_empty() {
        return Err(CliError::usage("at least one method is required"));
    }
    names.iter().map(|s| s.parse::<M>().map_err(CliError::from)).collect()
}

/// A constant (`"0"`) broadcast to all `k` coordinates, or `k` comma-separated values.
pub fn parse_vector(spec: &str, k: usize, what: &str) -> Result<MeanVector<f64>, CliError> {
    let vals: Vec<f64> = spec
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| CliError::usage(format!("{what}: not a finite number: {s:?}")))
        })
        .collect::<Result<_, _>>()?;
    match vals.len() {
        1 => Ok(MeanVector::constant(k, vals[0])),
        l if l == k => Ok(MeanVector::new(vals)),
        l => Err(CliError::usage(format!("{what}: expected 1 or {k} values, got {l}"))),
    }
}

pub fn parse_sided(s: &str) -> Result<Sided, CliError> {
    match s {
        "one" => Ok(Sided::One),
        "two" => Ok(Sided::Two),
        _ => Err(CliError::usage(format!("sided must be \"one\" or \"two\", got {s:?}"))),
    }
}

fn engine_for(scheme: &WeightScheme, draws: usize, seed: u64) -> EngineConfig {
    let fits = scheme
        .support_cardinality()
        .is_some_and(|c| c <= DEFAULT_SUPPORT_CAP as u128);
    if draws == 0 && fits {
        EngineConfig::exact()
    } else {
        EngineConfig::monte_carlo(if draws == 0 { AUTO_DRAWS } else { draws }, seed)
    }
}

fn chain_levels(alpha: f64, delta: f64, alphas: &[f64]) -> LevelSpec {
    LevelSpec {
        alpha,
        delta: Some(delta),
        alphas: alphas.to_vec(),
    }
}

fn sup_sided(phi: &PhiFunction, what: &str) -> Result<Sided, CliError> {
    match phi.kind() {
        PhiKind::Sup => Ok(Sided::One),
        PhiKind::SupAbs => Ok(Sided::Two),
        PhiKind::PNorm(_) => Err(CliError::usage(format!("{what} needs phi = sup or supabs, got {phi}"))),
    }
}

struct Row {
    report: ThresholdReport<f64>,
    phi: PhiFunction,
    mc_stderr: Option<f64>,
}

pub fn threshold(c: &ThresholdConfig) -> Result<String, CliError> {
    let file = File::open(&c.input).map_err(|e| CliError::usage(format!("{}: {e}", c.input)))?;
    let y = Sample::read_csv(file).map_err(|e| CliError::usage(format!("{}: {e}", c.input)))?;
    let (n, k) = (y.len(), y.dim());
    let methods: Vec<Method> = parse_methods(&c.methods)?;
    let phi: PhiFunction = c.phi.parse()?;
    let spec: SchemeSpec = c.scheme.parse()?;
    let scheme = spec.bind(n)?;
    let p = phi.p_bound();
    let (sigma, plug_in) = match c.sigma {
        Some(s) if s.is_finite() && s >= 0.0 => (MeanVector::constant(k, s), false),
        Some(s) => return Err(CliError::usage(format!("sigma must be finite and ≥ 0, got {s}"))),
        None => (y.coordinate_std(), true),
    };
    let sigma_p = sigma.norm(p);
    let sigma_inf = sigma.norm(confreg::PExponent::Infinity);
    let engine = engine_for(&scheme, c.draws, c.seed);
    let needs_e = methods
        .iter()
        .any(|m| matches!(m, Method::ConcGaussian | Method::ConcBounded | Method::Compound));
    let (consts, e) = if needs_e {
        let consts = scheme_constants(&scheme)?;
        (Some(consts), Some(resampled_expectation(&y, &scheme, &phi, &engine)?))
    } else {
        (None, None)
    };
    let consts_of = || -> &ResamplingConstants { consts.as_ref().expect("computed") };
    let e_value = || e.expect("computed").value;
    let e_stderr = |by: f64| engine.draws().map(|_| e.expect("computed").stderr / by);
    let tag = |r: ThresholdReport<f64>| {
        r.with_scheme(spec)
            .with_plug_in_sigma(plug_in)
            .with_mc(McMeta {
                draws: engine.draws(),
                seed: c.seed,
                stderr: e.map_or(0.0, |e| e.stderr),
            })
    };

    let mut rows = Vec::new();
    for &m in &methods {
        match m {
            Method::Bonferroni => {
                let sided = sup_sided(&phi, "bonferroni")?;
                let mut r = bonferroni_threshold(sigma_inf, n, k, c.alpha, sided)?;
                r.inputs.sigma_plug_in = plug_in;
                rows.push(Row { report: r, phi, mc_stderr: None });
            }
            Method::SingleTest => {
                let sided = sup_sided(&phi, "single_test")?;
                let mut r = single_test_threshold(sigma_inf, n, c.alpha, sided)?;
                r.inputs.sigma_plug_in = plug_in;
                rows.push(Row { report: r, phi, mc_stderr: None });
            }
            Method::ConcGaussian => {
                let cs = consts_of();
                let r = conc_gaussian_threshold(e_value(), cs, sigma_p, n, c.alpha, Direction::Upper)?;
                rows.push(Row { report: tag(r), phi, mc_stderr: e_stderr(cs.b.value) });
                if c.lower {
                    let r = conc_gaussian_threshold(e_value(), cs, sigma_p, n, c.alpha, Direction::Lower)?;
                    rows.push(Row { report: tag(r), phi, mc_stderr: e_stderr(cs.b.value) });
                }
            }
            Method::ConcBounded => {
                let cs = consts_of();
                let bound = c
                    .bound
                    .ok_or_else(|| CliError::usage("conc_bounded needs the almost-sure bound --M"))?;
                let ba = BoundedAssumption::new(bound, p)?;
                if c.lower && cs.d.is_none() {
                    return Err(CliError::usage(format!("D_W undefined for Efron (n = {n})")));
                }
                let (up, lo) = conc_bounded_thresholds(e_value(), cs, &ba, n, c.alpha)?;
                rows.push(Row { report: tag(up), phi, mc_stderr: e_stderr(cs.a.value) });
                if c.lower {
                    let d = cs.d.expect("checked").value;
                    rows.push(Row { report: tag(lo.expect("D exists")), phi, mc_stderr: e_stderr(d) });
                }
            }
            Method::Compound => {
                let cs = consts_of();
                let t_det = match c.t_det {
                    Some(t) => t,
                    None => match phi.kind() {
                        PhiKind::PNorm(_) => f64::INFINITY,
                        _ => {
                            let sided = sup_sided(&phi, "compound")?;
                            bonferroni_threshold(sigma_inf, n, k, c.alpha * (1.0 - c.delta), sided)?.value
                        }
                    },
                };
                let r = compound_threshold(e_value(), cs, sigma_p, n, c.alpha, c.delta, t_det)?;
                let se = match r.branch {
                    Some(CompoundBranch::Concentration) => e_stderr(cs.b.value),
                    _ => engine.draws().map(|_| 0.0),
                };
                rows.push(Row { report: tag(r), phi, mc_stderr: se });
            }
            Method::QuantileChain => {
                let levels = chain_levels(c.alpha, c.delta, &c.alphas);
                levels.validate()?;
                let trailing_level = levels.trailing_level();
                if trailing_level <= 0.0 {
                    return Err(CliError::usage("the chain levels leave no budget for the trailing bound"));
                }
                let f = match c.f_value {
                    Some(f) => f,
                    None => match phi.kind() {
                        PhiKind::PNorm(_) => {
                            return Err(CliError::usage("quantile_chain with a p-norm phi needs --f-value"))
                        }
                        _ => bonferroni_threshold(sigma_inf, n, k, trailing_level, Sided::Two)?.value,
                    },
                };
                let rad = WeightScheme::rademacher(n)?;
                let eng = engine_for(&rad, c.draws, c.seed);
                let trailing = TrailingBound { value: f, level: trailing_level };
                let mut r = quantile_chain_threshold(&y, &phi, &levels, trailing, &eng)?;
                r.inputs.sigma_plug_in = plug_in && c.f_value.is_none();
                rows.push(Row { report: r, phi, mc_stderr: None });
            }
        }
    }

    let null = match &c.mu_null {
        Some(s) => Some(parse_vector(s, k, "mu-null")?),
        None => None,
    };
    let dev = null.map(|mu| {
        MeanVector::new(
            y.empirical_mean()
                .values()
                .iter()
                .zip(mu.values())
                .map(|(a, b)| a - b)
                .collect(),
        )
    });

    let mut out = format!("{THRESHOLD_COLUMNS}\n");
    for row in rows {
        let r = &row.report;
        let rejected = match (&dev, r.direction) {
            (Some(d), Direction::Upper) => {
                let sided = match row.phi.kind() {
                    PhiKind::Sup => Sided::One,
                    _ => Sided::Two,
                };
                let set: Vec<usize> = reject_set_from_mean(d, r.value, sided).into_iter().map(|i| i + 1).collect();
                join(&set)
            }
            _ => String::new(),
        };
        let branch = r.branch.map(|b| match b {
            CompoundBranch::Concentration => "concentration",
            CompoundBranch::Deterministic => "deterministic",
        });
        let (draws, seed) = match r.mc {
            Some(mc) => (mc.draws.map_or("exact".to_string(), |d| d.to_string()), c.seed.to_string()),
            None => (String::new(), String::new()),
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.method,
            match r.direction {
                Direction::Upper => "upper",
                Direction::Lower => "lower",
            },
            r.value,
            r.level.alpha,
            opt(r.level.delta),
            join(&r.level.alphas),
            r.guaranteed_level,
            r.inputs.n,
            k,
            row.phi,
            r.inputs.scheme.clone().unwrap_or_default(),
            opt(r.inputs.sigma_norm),
            r.inputs.sigma_plug_in,
            draws,
            seed,
            opt(row.mc_stderr),
            opt(branch),
            rejected
        )
        .expect("write to string");
    }
    Ok(out)
}

fn comparison_plan(
    methods: &[String],
    alpha: f64,
    delta: f64,
    alphas: &[f64],
    sided: Sided,
    draws: usize,
    oracle_samples: usize,
) -> Result<ThresholdPlan, CliError> {
    let methods: Vec<ExperimentMethod> = parse_methods(methods)?;
    let mut plan = ThresholdPlan::new(methods, alpha, sided, draws);
    plan.level = chain_levels(alpha, delta, alphas);
    plan.oracle_samples = oracle_samples;
    plan.validate()?;
    Ok(plan)
}

fn check_m(m: usize) -> Result<(), CliError> {
    if m < 2 || !m.is_power_of_two() {
        return Err(CliError::usage(format!("m must be a power of two ≥ 2, got {m}")));
    }
    Ok(())
}

pub fn simulate(c: &SimulateConfig) -> Result<String, CliError> {
    check_m(c.m)?;
    let plan = comparison_plan(&c.methods, c.alpha, c.delta, &c.alphas, Sided::Two, c.draws, c.oracle_samples)?;
    let grid = ExperimentGrid {
        b_values: c.b_grid.clone(),
        reps: c.reps,
        plan,
    };
    let rows = run_threshold_comparison::<f64>(&grid, c.m, c.n, c.seed)?;
    let mut out = format!("{SIMULATE_COLUMNS}\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.b,
            r.method,
            r.mean,
            r.sd,
            opt(r.engine_draws),
            r.seed,
            opt(r.engine_stderr)
        )
        .expect("write to string");
    }
    Ok(out)
}

pub fn fwer(c: &FwerConfig) -> Result<String, CliError> {
    check_m(c.m)?;
    let sided = parse_sided(&c.sided)?;
    let plan = comparison_plan(&c.methods, c.alpha, c.delta, &c.alphas, sided, c.draws, c.oracle_samples)?;
    let field = TorusFieldConfig::new(c.m, c.b, c.n, c.seed)?;
    let mu = parse_vector(&c.mu, field.k(), "mu")?;
    let rows = estimate_fwer(&field, &mu, &plan, c.trials)?;
    let mut out = format!("{FWER_COLUMNS}\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            c.m, c.n, c.b, r.method, r.trials, r.rate, r.stderr, r.exceedance, r.exceedance_stderr, r.mean_threshold
        )
        .expect("write to string");
    }
    Ok(out)
}

fn accuracy_note(cs: &ResamplingConstants) -> String {
    let mut notes = Vec::new();
    for name in [ConstantName::A, ConstantName::B, ConstantName::C, ConstantName::D] {
        match cs.get(name).map(|c| c.accuracy) {
            Some(Accuracy::Bounds { lo, hi }) => notes.push(format!("{name} in [{lo};{hi}]")),
            Some(Accuracy::MonteCarlo { draws, stderr }) => {
                notes.push(format!("{name} mc {draws} draws se {stderr}"))
            }
            Some(Accuracy::Exact) => {}
            None => notes.push(format!("{name} undefined")),
        }
    }
    if notes.is_empty() {
        "exact".to_string()
    } else {
        notes.join(" ")
    }
}

pub fn constants(c: &ConstantsConfig) -> Result<String, CliError> {
    if c.schemes.is_empty() {
        return Err(CliError::usage("at least one scheme is required"));
    }
    let mut out = format!("{CONSTANTS_COLUMNS}\n");
    for s in &c.schemes {
        let spec: SchemeSpec = s.parse()?;
        let scheme = spec.bind(c.n)?;
        let mut cs = scheme_constants(&scheme)?;
        if c.mc_draws > 0 {
            cs.refine_with_monte_carlo(&scheme, c.mc_draws, c.seed)?;
        }
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            spec,
            c.n,
            cs.a.value,
            cs.b.value,
            cs.c.value,
            opt(cs.d.map(|d| d.value)),
            cs.accuracy_index(),
            scheme.complexity_label(),
            accuracy_note(&cs)
        )
        .expect("write to string");
    }
    Ok(out)
}
