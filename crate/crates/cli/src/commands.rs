use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use potts_gks::function_classes::moments;
use potts_gks::io::{load_model, model_to_json};
use potts_gks::mc::{estimate_chains, EstimatorMode, McConfig};
use potts_gks::model::{log_partition_function, potts_expectations, spin_distribution};
use potts_gks::random_cluster::{coupled_spin_marginal, rc_expectation, rc_measure, total_variation};
use potts_gks::verifier::{
    fuzz, verify_disjoint_support, verify_gks_pair, verify_monotone, verify_real_nonneg, Coordinate, FuzzConfig,
    VerificationReport, VerifyOptions,
};
use potts_gks::{
    augment, check_fq, check_fq_i, potts_expectation, BondConfig, Cap, Error, Factor, PottsModel, Region, Result,
    SpinFunction,
};
use serde_json::json;

use crate::report::Reporter;
use crate::{inputs, Check, Cli, Command, ExactArgs, FclassArgs, FuzzArgs, McArgs, Observable, RcArgs, VerifyArgs};

pub fn dispatch<W: Write>(cli: &Cli, rep: &mut Reporter<W>) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        // the pool can only be configured once per process; later calls keep
        // the first setting
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let cap = match cli.cap {
        Some(c) => Cap(c),
        None => Cap::from_env()?,
    };
    match &cli.command {
        Command::Exact(args) => exact(args, cap, rep),
        Command::Rc(args) => rc(args, cap, rep),
        Command::Fclass(args) => fclass(args, rep),
        Command::Verify(args) => verify(args, cap, rep),
        Command::Mc(args) => mc(args, cap, rep),
        Command::Fuzz(args) => run_fuzz(args, cap, rep),
    }
}

fn model_at(path: &Path) -> Result<PottsModel> {
    load_model(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

struct Resolved {
    f: SpinFunction,
    r: Region,
    s: Option<Region>,
}

impl Resolved {
    fn factors(&self) -> Vec<Factor> {
        let mut factors = vec![(self.f.clone(), self.r.clone())];
        if let Some(s) = &self.s {
            factors.push((self.f.clone(), s.clone()));
        }
        factors
    }
}

fn resolve(model: &PottsModel, obs: &Observable) -> Result<Option<Resolved>> {
    let Some(spec) = &obs.f else {
        if obs.r.is_some() || obs.s.is_some() {
            return Err(Error::Parse("--R and --S need --f".into()));
        }
        return Ok(None);
    };
    let f = inputs::function(spec, Some(model.q()))?;
    let r = match &obs.r {
        Some(list) => inputs::region(model, list)?,
        None => Region::all(model),
    };
    let s = obs.s.as_deref().map(|list| inputs::region(model, list)).transpose()?;
    Ok(Some(Resolved { f, r, s }))
}

fn exact<W: Write>(args: &ExactArgs, cap: Cap, rep: &mut Reporter<W>) -> Result<()> {
    let model = model_at(&args.model)?;
    if args.dump_model {
        rep.raw(&model_to_json(&model))?;
    }
    let log_z = log_partition_function(&model, cap)?;
    rep.record(
        "partition_function",
        &json!({
            "q": model.q(),
            "vertices": model.num_vertices(),
            "edges": model.num_edges(),
            "z": log_z.exp(),
            "log_z": log_z,
        }),
    )?;
    rep.note("log_z", log_z);

    if let Some(obs) = resolve(&model, &args.obs)? {
        let mut labels = vec![("R", obs.r.names(&model))];
        let mut observables = vec![vec![(obs.f.clone(), obs.r.clone())]];
        if let Some(s) = &obs.s {
            labels.push(("S", s.names(&model)));
            labels.push(("RS", Vec::new()));
            observables.push(vec![(obs.f.clone(), s.clone())]);
            observables.push(obs.factors());
        }
        let means = potts_expectations(&model, &observables, cap)?;
        for ((which, names), mean) in labels.into_iter().zip(means) {
            rep.record("mean", &json!({ "observable": which, "region": names, "mean": mean }))?;
        }
    }
    Ok(())
}

fn bond_label(model: &PottsModel, aug: &potts_gks::AugmentedGraph, e: usize) -> String {
    let (a, b) = aug.endpoints(e);
    let name = |v: usize| {
        if v == aug.ghost() {
            "ghost".to_string()
        } else {
            model.vertices()[v].clone()
        }
    };
    format!("{}-{}", name(a), name(b))
}

fn rc<W: Write>(args: &RcArgs, cap: Cap, rep: &mut Reporter<W>) -> Result<()> {
    let model = model_at(&args.model)?;
    let aug = augment(&model);

    let tv = total_variation(&coupled_spin_marginal(&aug, cap)?, &spin_distribution(&model, cap)?);
    rep.record("coupling", &json!({ "total_variation": tv, "tolerance": args.tol, "passed": tv <= args.tol }))?;
    rep.check(tv <= args.tol);

    if args.list {
        let bonds: Vec<_> = (0..aug.num_bonds())
            .map(|e| json!({ "bond": e, "ends": bond_label(&model, &aug, e), "p": aug.probability(e) }))
            .collect();
        rep.record("bonds", &json!({ "bonds": bonds }))?;
        let measure = rc_measure(&aug, cap)?;
        for (i, &phi) in measure.probabilities().iter().enumerate() {
            let omega = BondConfig::from_index(i as u64, aug.num_bonds());
            let open: Vec<usize> = (0..omega.len()).filter(|&e| omega.is_open(e)).collect();
            rep.record("bond_config", &json!({ "index": i, "open": open, "phi": phi }))?;
        }
    }

    if let Some(obs) = resolve(&model, &args.obs)? {
        let factors = obs.factors();
        let phi = rc_expectation(&aug, &factors, cap)?;
        let potts = potts_expectation(&model, &factors, cap)?;
        let diff = (phi - potts).norm();
        rep.record(
            "tower",
            &json!({ "rc_mean": phi, "potts_mean": potts, "difference": diff, "passed": diff <= args.tol }),
        )?;
        rep.check(diff <= args.tol);
    }
    Ok(())
}

fn fclass<W: Write>(args: &FclassArgs, rep: &mut Reporter<W>) -> Result<()> {
    let spec = args
        .kind
        .as_deref()
        .or(args.f.as_deref())
        .ok_or_else(|| Error::Parse("one of --kind or --f is required".into()))?;
    let f = inputs::function(spec, args.q)?;
    let report = match args.index {
        Some(i) => check_fq_i(&f, i, args.m, args.tol)?,
        None => check_fq(&f, args.m, args.tol),
    };
    let at_zero = check_fq_i(&f, 0, args.m, args.tol)?.passed();
    let sums: Vec<Complex64> = moments(&f, args.m).sums().to_vec();

    let mut record = serde_json::to_value(&report)?;
    record["q"] = f.q().into();
    record["values"] = serde_json::to_value(f.values())?;
    record["in_fq_0"] = at_zero.into();
    record["power_sums"] = serde_json::to_value(sums)?;
    record["passed"] = report.passed().into();
    rep.record("membership", &record)?;
    rep.check(report.passed());
    rep.note("q", f.q());
    rep.note("M", args.m);
    Ok(())
}

fn emit<W: Write>(rep: &mut Reporter<W>, report: &VerificationReport) -> Result<()> {
    rep.record("verification", report)?;
    rep.check(report.passed());
    Ok(())
}

fn coordinate_label(model: &PottsModel, c: Coordinate) -> String {
    match c {
        Coordinate::Coupling(e) => format!("J:{e}"),
        Coordinate::Field(v) => format!("h:{}", model.vertices()[v]),
    }
}

fn verify<W: Write>(args: &VerifyArgs, cap: Cap, rep: &mut Reporter<W>) -> Result<()> {
    let model = model_at(&args.model)?;
    let obs = resolve(&model, &args.obs)?.ok_or_else(|| Error::Parse("verify needs --f".into()))?;
    let opts = VerifyOptions { tol: args.tol, moment_bound: args.m, cap, ..Default::default() };
    let wants = |c: Check| args.check == c || args.check == Check::All;
    let only = |c: Check| args.check == c;

    if wants(Check::Real) {
        emit(rep, &verify_real_nonneg(&model, &obs.f, &obs.r, &opts)?)?;
    }

    if wants(Check::Gks) {
        match &obs.s {
            Some(s) => emit(rep, &verify_gks_pair(&model, &obs.f, &obs.r, s, &opts)?)?,
            None if only(Check::Gks) => return Err(Error::Parse("verify gks needs --S".into())),
            None => {}
        }
    }

    if wants(Check::Monotone) {
        let explicit = !args.coords.is_empty();
        let coords = if explicit {
            args.coords.iter().map(|c| inputs::coordinate(&model, c)).collect::<Result<Vec<_>>>()?
        } else {
            Coordinate::all(&model)
        };
        for c in coords {
            match verify_monotone(&model, &obs.f, &obs.r, c, &opts) {
                Ok(report) => {
                    for r in report.into_reports() {
                        emit(rep, &r)?;
                    }
                }
                // a function outside the index-0 class still has its
                // coupling checks on a field-free model
                Err(Error::NotCertified(reason))
                    if !explicit && !model.has_field() && matches!(c, Coordinate::Field(_)) =>
                {
                    rep.record("skipped", &json!({ "coordinate": coordinate_label(&model, c), "reason": reason }))?;
                }
                Err(e) => return Err(e),
            }
        }
    }

    if wants(Check::Disjoint) {
        match (&args.f1, &obs.s) {
            (Some(spec), Some(s)) => {
                let f1 = inputs::function(spec, Some(model.q()))?;
                emit(rep, &verify_disjoint_support(&model, &obs.f, &f1, &obs.r, s, &opts)?)?;
            }
            _ if only(Check::Disjoint) => return Err(Error::Parse("verify disjoint needs --f1 and --S".into())),
            _ => {}
        }
    }
    Ok(())
}

fn mc<W: Write>(args: &McArgs, cap: Cap, rep: &mut Reporter<W>) -> Result<()> {
    let model = model_at(&args.model)?;
    let obs = resolve(&model, &args.obs)?.ok_or_else(|| Error::Parse("mc needs --f".into()))?;
    let factors = obs.factors();
    let config = McConfig {
        sweeps: args.sweeps,
        burn_in: args.burn_in.unwrap_or(args.sweeps / 10),
        seed: args.seed,
        mode: if args.rb { EstimatorMode::RaoBlackwell } else { EstimatorMode::Raw },
    };
    let estimate = estimate_chains(&model, &factors, &config, args.chains)?;
    rep.record("estimate", &estimate)?;
    rep.note("seed", args.seed);
    rep.note("mean", serde_json::to_value(estimate.mean)?);
    rep.note("std_error", estimate.std_error);

    if args.exact {
        let exact = potts_expectation(&model, &factors, cap)?;
        let z = estimate.z_score(exact);
        rep.record("comparison", &json!({ "exact": exact, "z": z, "max_z": args.z, "passed": z <= args.z }))?;
        rep.check(z <= args.z);
    }
    Ok(())
}

fn run_fuzz<W: Write>(args: &FuzzArgs, cap: Cap, rep: &mut Reporter<W>) -> Result<()> {
    let config = FuzzConfig {
        q_min: args.q_min,
        q_max: args.q_max,
        min_vertices: args.min_vertices,
        max_vertices: args.max_vertices,
        edge_density: args.density,
        j_max: args.j_max,
        h_max: args.h_max,
        boundary_prob: args.boundary,
        adversarial_fraction: args.adversarial,
        trials: args.trials,
        seed: args.seed,
        tol: args.tol,
        cap: cap.0,
    };
    let outcome = fuzz(&config)?;
    for v in &outcome.violations {
        rep.record("violation", v)?;
    }
    let s = &outcome.summary;
    rep.tally(s.checks_run, s.violations);
    rep.note("trials", s.trials);
    rep.note("seed", s.seed);
    rep.note("not_certified", s.not_certified);
    rep.note("infeasible", s.infeasible);
    Ok(())
}
