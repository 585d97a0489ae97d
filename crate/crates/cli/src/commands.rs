use std::fs::File;
use std::io::BufWriter;

use clap::ValueEnum;
use polarsim_core::analysis::analyze;
use polarsim_core::constants::{Constants, ShippedTable};
use polarsim_core::constructions::{contraction_factor, signed_margin};
use polarsim_core::dynamics::{
    derive_seed, sample_initial_with, stream_rng, write_trace, ActivityStop, TraceMeta, TAG_INIT,
};
use polarsim_core::ensemble::run_ensemble;
use polarsim_core::lab::{
    azuma_tail, dprime_scan, run_two_chain, two_chain_report, verify_block_properties, wilson,
    AzumaKernel, AzumaParams, BlockCheckParams, DprimeScanParams, LabReport, P0Law, P1Law,
    StdKernel, TwoChainParams, Z95,
};
use polarsim_core::sampler::{InactiveSpec, ScatterMode};
use polarsim_core::*;
use serde_json::{json, Value};

use crate::cli::*;
use crate::error::{CliError, CliResult};
use crate::manifest::{Outputs, RunManifest};

/// Largest tolerated drift of an opinion norm before a run counts as broken.
const NORM_BREACH: f64 = 1e-9;

pub fn run(cli: Cli, argv: &[String]) -> CliResult<()> {
    match cli.command {
        Command::Simulate(a) => simulate(a, argv),
        Command::Ensemble(a) => ensemble(a, argv),
        Command::Construct(a) => construct(a, argv),
        Command::Lab { verb } => lab(verb, argv),
        Command::Analyze(a) => analyze_cmd(a),
        Command::Constants(a) => constants(a),
        Command::Rerun(a) => rerun(a),
    }
}

fn set_jobs(jobs: Option<usize>) {
    if let Some(j) = jobs {
        // A second call in the same process keeps the first pool, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global();
    }
}

fn rule_of(f: &ProcessFlags) -> CliResult<UpdateRule> {
    Ok(match f.rule {
        RuleSpec::Linear => UpdateRule::linear(f.alpha)?,
        RuleSpec::Piecewise(beta) => UpdateRule::piecewise(f.alpha, beta)?,
    })
}

/// `(n, d)` of the run: from `--init` when given.
fn shape(f: &ProcessFlags) -> CliResult<(usize, usize, Option<Configuration>)> {
    match &f.init {
        Some(path) => {
            let c = ConfigFile::load(path)?.to_config(f.renormalize)?;
            Ok((c.n(), c.dim(), Some(c)))
        }
        None => Ok((f.n, f.d, None)),
    }
}

fn inactive_spec(f: &ProcessFlags, n: usize, d: usize) -> CliResult<InactiveSpec> {
    let k = Constants::derive(n, d, f.alpha)?;
    let sizes = if f.sizes.is_empty() {
        vec![n / 2, n - n / 2]
    } else {
        f.sizes.clone()
    };
    if sizes.iter().sum::<usize>() != n {
        return Err(CliError::Input(format!(
            "--sizes {sizes:?} do not sum to n = {n}"
        )));
    }
    let (lo, hi) = f.scale.unwrap_or((k.eps * 1e-3, k.eps));
    Ok(InactiveSpec {
        sizes,
        cross: (lo, hi),
        within: (lo, hi),
        scatter: ScatterMode::Generic,
        require: Some((hi, hi)),
        shuffle: true,
    })
}

fn init_kind(f: &ProcessFlags, family: InitFamily, n: usize, d: usize) -> CliResult<InitKind> {
    if let Some(path) = &f.init {
        return Ok(InitKind::File {
            path: path.clone(),
            renormalize: f.renormalize,
        });
    }
    Ok(match family {
        InitFamily::Uniform => InitKind::UniformSphere,
        InitFamily::Antipodal => InitKind::Antipodal { spread: f.spread },
        InitFamily::Inactive => InitKind::Inactive(inactive_spec(f, n, d)?),
    })
}

fn init_label(kind: &InitKind) -> Value {
    match kind {
        InitKind::UniformSphere => json!("uniform"),
        InitKind::Antipodal { spread } => json!({ "antipodal": { "spread": spread } }),
        InitKind::Inactive(spec) => json!({ "inactive": spec }),
        InitKind::File { path, renormalize } => json!({ "file": path, "renormalize": renormalize }),
    }
}

fn process_params(f: &ProcessFlags, n: usize, d: usize) -> CliResult<ProcessParams> {
    let mut p = ProcessParams::new(n, d, f.alpha, f.run.seed)?;
    p.rule = rule_of(f)?;
    if let Some(path) = &f.pair_dist {
        p.pair_dist = PairDist::load(path)?;
    }
    p.sample_every = f.sample_every;
    p.stop.max_steps = f.max_steps;
    p.stop.polarization_tol = f.stop_polarized.0;
    if let Some(spec) = f.stop_active {
        let act = match spec {
            ActiveSpec::Auto => {
                let k = Constants::derive(n, d, f.alpha)?;
                ActivityStop {
                    eps: k.eps,
                    eps1: k.eps1,
                    period: k.t,
                }
            }
            ActiveSpec::Explicit { eps, eps1, period } => ActivityStop { eps, eps1, period },
        };
        p.stop.activity = Some(act);
        p.record_eps = (act.eps, act.eps1);
    }
    p.validate()?;
    Ok(p)
}

fn simulate(a: SimulateArgs, argv: &[String]) -> CliResult<()> {
    let f = &a.process;
    set_jobs(f.run.jobs);
    let (n, d, loaded) = shape(f)?;
    let params = process_params(f, n, d)?;
    let kind = init_kind(f, f.init_kind, n, d)?;
    let c0 = match loaded {
        Some(c) => c,
        None => sample_initial(n, d, &kind, f.run.seed)?,
    };
    let out = simulate_process(&params, &c0)?;
    let mut files = Outputs::create(&f.run.out)?;
    let trace_path = files.path("trace.csv");
    write_trace(BufWriter::new(File::create(&trace_path)?), &out.trace)?;
    files.record("trace.csv");
    let meta = TraceMeta::new(&params, &out);
    files.json("trace.meta.json", &meta)?;
    files.json("initial.json", &ConfigFile::from_config(&c0, f.alpha))?;
    files.json("final.json", &ConfigFile::from_config(&out.config, f.alpha))?;
    let last = out.trace.last().expect("trace holds t = 0");
    println!(
        "reason={} steps={} inactive={} polarized={} trace={}",
        serde_json::to_value(out.reason)?.as_str().unwrap_or("?"),
        out.steps,
        last.inactive,
        is_polarized(&out.config, f.stop_polarized.0.unwrap_or(1e-6)),
        trace_path.display()
    );
    files.finish(
        "simulate",
        argv,
        f.run.seed,
        json!({ "trace_meta": meta, "init": init_label(&kind) }),
    )?;
    Ok(())
}

fn simulate_process(params: &ProcessParams, c0: &Configuration) -> CliResult<SimOutcome> {
    let out = polarsim_core::simulate(params, c0)?;
    let dev = out.config.max_norm_deviation();
    if dev > NORM_BREACH {
        return Err(CliError::Invariant(format!(
            "opinion norm drifted by {dev:e}"
        )));
    }
    Ok(out)
}

fn ensemble(a: EnsembleArgs, argv: &[String]) -> CliResult<()> {
    let f = &a.process;
    set_jobs(f.run.jobs);
    if a.runs == 0 {
        return Err(CliError::Input("--runs must be at least 1".into()));
    }
    let (n, d, _) = shape(f)?;
    let params = process_params(f, n, d)?;
    let kind = init_kind(f, f.init_kind, n, d)?;
    let summary = run_ensemble(&params, &kind, a.runs)?;
    let mut files = Outputs::create(&f.run.out)?;
    let path = files.json("ensemble.json", &summary)?;
    println!(
        "runs={} polarized_fraction={} median_steps={} median_min_group_fraction={} cross_activation_fraction={} summary={}",
        summary.runs,
        summary.polarized_fraction,
        summary.median_steps.map_or("none".into(), |m| m.to_string()),
        summary.median_min_group_fraction,
        summary.cross_activation_fraction.map_or("none".into(), |x| x.to_string()),
        path.display()
    );
    let stop = params.stop;
    files.finish(
        "ensemble",
        argv,
        f.run.seed,
        json!({
            "n": n, "d": d, "alpha": f.alpha, "rule": params.rule, "pair_dist": params.pair_dist.label(),
            "runs": a.runs, "stop": stop, "sample_every": params.sample_every,
            "record_eps": params.record_eps, "init": init_label(&kind),
        }),
    )?;
    Ok(())
}

/// Outcome of executing a schedule.
struct Verdict {
    passed: bool,
    details: Value,
}

fn construct(a: ConstructArgs, argv: &[String]) -> CliResult<()> {
    let f = &a.process;
    set_jobs(f.run.jobs);
    let rule = rule_of(f)?;
    let (n, d, loaded) = shape(f)?;
    // Every verb but to-inactive needs a clustered start.
    let family = match (a.verb, f.init_kind) {
        (ConstructVerb::ToInactive, fam) => fam,
        (_, InitFamily::Uniform) => InitFamily::Inactive,
        (_, fam) => fam,
    };
    let eb = epsilon_base(d, f.alpha);
    let collapse_default =
        a.verb == ConstructVerb::Collapse && loaded.is_none() && f.scale.is_none();
    let eps = a.eps.0.unwrap_or(if a.verb == ConstructVerb::Collapse {
        eb / 2.0
    } else {
        eb
    });
    let kind = if collapse_default {
        let mut spec = inactive_spec(f, n, d)?;
        spec.cross = (eps, eb * (spec.sizes.len() as f64 - 1.0).max(1.0));
        spec.within = (1e-10, eb);
        spec.require = Some((eb, eb));
        InitKind::Inactive(spec)
    } else {
        init_kind(f, family, n, d)?
    };
    let c0 = match loaded {
        Some(c) => c,
        None if collapse_default => collapse_start(&kind, n, d, eps, f.run.seed)?,
        None => sample_initial(n, d, &kind, f.run.seed)?,
    };
    let a0 = correlation(&c0);
    let k = Constants::derive(n, d, f.alpha)?;

    let (schedule, check): (Schedule, Check) = match a.verb {
        ConstructVerb::ToInactive => {
            let s = path_to_inactive(&c0, eps, &rule)?;
            let anchors: Vec<usize> = s.steps.iter().map(|x| x.influencer).collect();
            let c0c = c0.clone();
            (
                s,
                Box::new(move |out| {
                    let inactive = is_inactive(&correlation(out), eps, eps).inactive;
                    let moved: Vec<usize> = anchors
                        .iter()
                        .copied()
                        .filter(|&i| out.opinion(i) != c0c.opinion(i))
                        .collect();
                    Verdict {
                        passed: inactive && moved.is_empty(),
                        details: json!({ "eps": eps, "inactive": inactive, "moved_anchors": moved }),
                    }
                }),
            )
        }
        ConstructVerb::Consistency => {
            let mode = match a.mode {
                ModeArg::Adaptive => ConsistencyMode::Adaptive,
                ModeArg::WorstCase => ConsistencyMode::WorstCase,
            };
            let plan = reach_consistency(&c0, &rule, a.blocks, mode)?;
            let p = clusters(&a0)?;
            let (ba, bb, i0, j0) = (plan.a, plan.b, plan.i0, plan.j0);
            let c_cons = k.c_cons();
            let margin_floor = k.cons_margin;
            (
                plan.schedule,
                Box::new(move |out| {
                    let a1 = correlation(out);
                    let rep = is_consistent(&a1, &p, ba, bb, c_cons);
                    let margin = signed_margin(&a1, &a1, &p, ba, bb, i0, j0);
                    Verdict {
                        passed: rep.consistent,
                        details: json!({
                            "blocks": [ba, bb], "i0": i0, "j0": j0, "c_cons": c_cons,
                            "consistency": rep, "realized_margin": margin, "cons_margin": margin_floor,
                        }),
                    }
                }),
            )
        }
        ConstructVerb::Amplify => {
            let p = clusters(&a0)?;
            let (ba, bb) = match a.blocks {
                Some(b) => b,
                None => {
                    let r = realizing_pair(&a0, &p)?;
                    (r.a, r.b)
                }
            };
            let s = increase_delta_schedule(&p, ba, bb)?;
            if !is_consistent(&a0, &p, ba, bb, 0.0).consistent {
                return Err(Error::PreconditionViolated(format!(
                    "blocks {ba} and {bb} are not consistent"
                ))
                .into());
            }
            let before = delta_ab(&a0, &p, ba, bb);
            if potentials(&a0, &p).delta0 >= eps {
                return Err(Error::PreconditionViolated(format!(
                    "delta0 is not below eps = {eps}"
                ))
                .into());
            }
            let need = 1.0 + k.c_adv_at(eps);
            (
                s,
                Box::new(move |out| {
                    let after = delta_ab(&correlation(out), &p, ba, bb);
                    let factor = after / before;
                    Verdict {
                        passed: factor >= need,
                        details: json!({ "blocks": [ba, bb], "delta_ab_before": before, "delta_ab_after": after,
                                         "factor": factor, "required": need }),
                    }
                }),
            )
        }
        ConstructVerb::Tighten => {
            let p = clusters(&a0)?;
            if a.block >= p.len() {
                return Err(CliError::Input(format!(
                    "--block {} but only {} clusters",
                    a.block,
                    p.len()
                )));
            }
            let s = tighten_cluster_schedule(&c0, &p, a.block)?;
            let members = p.block(a.block).to_vec();
            let c0c = c0.clone();
            (
                s,
                Box::new(move |out| {
                    let c = contraction_factor(&c0c, out, &members);
                    println!("contraction factor {c}");
                    Verdict {
                        passed: c < 1.0,
                        details: json!({ "members": members, "contraction_factor": c }),
                    }
                }),
            )
        }
        ConstructVerb::Collapse => {
            let p = clusters(&a0)?;
            let (i0, j0) = match a.pair {
                Some(x) => x,
                None => {
                    let r = realizing_pair(&a0, &p)?;
                    (r.i, r.j)
                }
            };
            let s = collapse_clusters(&c0, &rule, eps, i0, j0)?;
            let before = p.len();
            (
                s,
                Box::new(move |out| {
                    let a1 = correlation(out);
                    let inactive = is_inactive(&a1, eps, eps).inactive;
                    let after = clusters(&a1).ok().map(|q| q.len());
                    Verdict {
                        passed: inactive && after.is_some_and(|x| x < before),
                        details: json!({ "eps": eps, "pair": [i0, j0], "inactive": inactive,
                                         "clusters_before": before, "clusters_after": after }),
                    }
                }),
            )
        }
    };

    let mut files = Outputs::create(&f.run.out)?;
    files.json("initial.json", &ConfigFile::from_config(&c0, f.alpha))?;
    let path = files.json("schedule.json", &schedule)?;
    println!(
        "schedule of {} steps written to {}",
        schedule.len(),
        path.display()
    );
    let mut failure = None;
    if a.execute {
        let out = schedule.execute(&c0, &rule)?;
        let v = check(&out);
        files.json("post.json", &ConfigFile::from_config(&out, f.alpha))?;
        files.json(
            "verify.json",
            &json!({ "passed": v.passed, "details": v.details }),
        )?;
        println!(
            "post-condition {}",
            if v.passed { "holds" } else { "FAILED" }
        );
        if !v.passed {
            failure = Some(v.details.to_string());
        }
    }
    let verb = a.verb.to_possible_value().map(|v| v.get_name().to_string());
    files.finish(
        "construct",
        argv,
        f.run.seed,
        json!({ "verb": verb, "n": n, "d": d, "alpha": f.alpha, "eps": eps, "init": init_label(&kind),
                "execute": a.execute }),
    )?;
    match failure {
        Some(detail) => Err(CliError::PostCondition(detail)),
        None => Ok(()),
    }
}

type Check = Box<dyn Fn(&Configuration) -> Verdict>;

/// First draw whose delta0 pair reaches `eps`, so that collapse is admissible.
fn collapse_start(
    kind: &InitKind,
    n: usize,
    d: usize,
    eps: f64,
    seed: u64,
) -> CliResult<Configuration> {
    let mut rng = stream_rng(derive_seed(seed, TAG_INIT), 0);
    for _ in 0..1000 {
        let c = sample_initial_with(n, d, kind, &mut rng)?;
        let a = correlation(&c);
        let p = clusters(&a)?;
        let r = realizing_pair(&a, &p)?;
        if a.get(r.i, r.j).abs() >= eps {
            return Ok(c);
        }
    }
    Err(CliError::Input(format!(
        "no sampled start has a cross pair above eps = {eps}; pass --init"
    )))
}

fn lab(verb: LabVerb, argv: &[String]) -> CliResult<()> {
    match verb {
        LabVerb::TwoChain(a) => two_chain(a, argv),
        LabVerb::Azuma(a) => azuma(a, argv),
        LabVerb::BlockCheck(a) => block_check(a, argv),
        LabVerb::DprimeScan(a) => dprime(a, argv),
    }
}

fn two_chain(a: TwoChainArgs, argv: &[String]) -> CliResult<()> {
    set_jobs(a.run.jobs);
    let mut p = TwoChainParams::shipped(a.trials, a.run.seed)?;
    p.c = a.c.unwrap_or(p.c);
    p.c_min = a.c_min.unwrap_or(p.c_min);
    p.c_tilde = a.c_tilde.unwrap_or(p.c_tilde);
    p.p0_init = a.p0_init;
    p.p1_init = a.p1_init;
    p.t_max = a.t_max;
    p.kernel = StdKernel {
        p0: match a.p0_law {
            P0Arg::TwoPoint => P0Law::TwoPoint,
            P0Arg::Deterministic => P0Law::Deterministic,
        },
        p1: match a.p1_law {
            P1Arg::Compliant => P1Law::Compliant,
            P1Arg::AlwaysUp => P1Law::AlwaysUp,
        },
    };
    let outcomes = run_two_chain(&p)?;
    let report = two_chain_report(&p, &outcomes);
    let mut files = Outputs::create(&a.run.out)?;
    let path = files.json("two_chain.json", &report)?;
    let hw = report.details["wilson_half_width"]
        .as_f64()
        .unwrap_or(f64::NAN);
    println!(
        "P1 escape {} (+/- {hw:.4}) vs bound {}: {} ; capped fraction {} ; report {}",
        report.estimate,
        report.bound,
        if report.estimate + 3.0 * hw <= report.bound {
            "within"
        } else {
            "ABOVE"
        },
        report.details["capped_fraction"],
        path.display()
    );
    files.finish("lab two-chain", argv, a.run.seed, serde_json::to_value(&p)?)?;
    Ok(())
}

fn azuma(a: AzumaArgs, argv: &[String]) -> CliResult<()> {
    set_jobs(a.run.jobs);
    let kernel = match a.kernel {
        AzumaKernelArg::TwoPoint => AzumaKernel::TwoPoint,
        AzumaKernelArg::Deterministic => AzumaKernel::Deterministic,
    };
    let mut reports = Vec::new();
    for &t in &a.t {
        let r = azuma_tail(&AzumaParams {
            c1: a.c1,
            c2: a.c2,
            t,
            trials: a.trials,
            seed: a.run.seed,
            kernel,
        })?;
        let w = wilson(r.hits, r.trials, Z95);
        println!(
            "t={t} empirical={} bound={} {}",
            r.empirical,
            r.bound,
            if r.empirical <= r.bound {
                "ok"
            } else {
                "EXCEEDS"
            }
        );
        reports.push(LabReport {
            estimate: r.empirical,
            wilson_interval: Some([w.lo, w.hi]),
            bound: r.bound,
            trials: r.trials,
            seed: a.run.seed,
            kernel_id: serde_json::to_value(kernel)?
                .as_str()
                .unwrap_or("?")
                .to_string(),
            violations: Vec::new(),
            details: json!({ "t": t, "hits": r.hits, "c1": a.c1, "c2": a.c2 }),
        });
    }
    let mut files = Outputs::create(&a.run.out)?;
    files.json("azuma.json", &reports)?;
    files.finish(
        "lab azuma",
        argv,
        a.run.seed,
        json!({ "c1": a.c1, "c2": a.c2, "t": a.t, "trials": a.trials, "kernel": kernel }),
    )?;
    Ok(())
}

fn block_check(a: BlockCheckArgs, argv: &[String]) -> CliResult<()> {
    set_jobs(a.run.jobs);
    let mut p = BlockCheckParams::from_constants(a.n, a.d, a.alpha, a.run.seed)?;
    p.probes = a.probes.unwrap_or(p.probes);
    p.replicas = a.replicas.unwrap_or(p.replicas);
    let r = verify_block_properties(&p)?;
    let mut files = Outputs::create(&a.run.out)?;
    let path = files.json("block_check.json", &r)?;
    println!(
        "probed={} deterministic violations={}/{} P0 sign ok {}/{} P1 sign ok {}/{} report {}",
        r.probed,
        r.deterministic_violations,
        r.deterministic_checks,
        r.p0_sign_ok,
        r.probed,
        r.p1_sign_ok,
        r.p1_probed,
        path.display()
    );
    files.finish(
        "lab block-check",
        argv,
        a.run.seed,
        serde_json::to_value(&p)?,
    )?;
    Ok(())
}

fn dprime(a: DprimeScanArgs, argv: &[String]) -> CliResult<()> {
    set_jobs(a.run.jobs);
    let p = DprimeScanParams {
        configs: a.configs,
        n: a.n,
        d: a.d,
        alpha: a.alpha,
        tol: a.tol,
        seed: a.run.seed,
    };
    let scan = dprime_scan(&p)?;
    let report = LabReport {
        estimate: scan.findings.len() as f64 / scan.configs.max(1) as f64,
        wilson_interval: None,
        bound: 0.0,
        trials: scan.configs,
        seed: a.run.seed,
        kernel_id: "exact-enumeration".into(),
        violations: scan
            .findings
            .iter()
            .map(serde_json::to_value)
            .collect::<std::result::Result<_, _>>()?,
        details: json!({ "min_drift": scan.min_drift, "tol": a.tol, "n": a.n, "d": a.d, "alpha": a.alpha }),
    };
    let mut files = Outputs::create(&a.run.out)?;
    let path = files.json("dprime_scan.json", &report)?;
    println!(
        "configs={} negative-drift findings={} min drift={} report {}",
        scan.configs,
        scan.findings.len(),
        scan.min_drift,
        path.display()
    );
    files.finish(
        "lab dprime-scan",
        argv,
        a.run.seed,
        serde_json::to_value(&p)?,
    )?;
    Ok(())
}

fn analyze_cmd(a: AnalyzeArgs) -> CliResult<()> {
    let file = ConfigFile::load(&a.init)?;
    let c = file.to_config(a.renormalize)?;
    let eb = epsilon_base(c.dim(), file.alpha);
    let report = analyze(&c, a.eps0.unwrap_or(eb), a.eps1.unwrap_or(eb), a.tol_orth);
    let text = serde_json::to_string_pretty(&report)? + "\n";
    if let Some(path) = &a.out {
        std::fs::write(path, &text)?;
    }
    print!("{text}");
    Ok(())
}

fn constants(a: ConstantsArgs) -> CliResult<()> {
    let k = Constants::derive(a.n, a.d, a.alpha)?;
    let table = ShippedTable::load()?;
    if a.json {
        let rows: serde_json::Map<String, Value> = k
            .rows()
            .into_iter()
            .map(|(name, v)| {
                (
                    name.to_string(),
                    json!({ "value": v, "derivation": table.derivation(name) }),
                )
            })
            .collect();
        let out = json!({
            "n": a.n, "d": a.d, "alpha": a.alpha, "version": table.version,
            "constants": rows, "two_chain": table.two_chain,
        });
        return emit(&(serde_json::to_string_pretty(&out)? + "\n"));
    }
    let mut text = format!(
        "constants for n={}, d={}, alpha={} (table version {})\n",
        a.n, a.d, a.alpha, table.version
    );
    for (name, v) in k.rows() {
        text += &format!("{name:<12} {v:<24e} {}\n", table.derivation(name));
    }
    let tc = &table.two_chain;
    text += &format!(
        "two-chain    C={} C_min={} C_tilde={} ({})\n",
        tc.c, tc.c_min, tc.c_tilde, tc.calibration
    );
    emit(&text)
}

/// Writes to stdout; a closed pipe (`| head`) is not an error.
fn emit(text: &str) -> CliResult<()> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn rerun(a: RerunArgs) -> CliResult<()> {
    let m = RunManifest::load(&a.manifest)?;
    let mut argv = m.argv.clone();
    if let Some(out) = &a.out {
        argv = crate::manifest::set_flag(&argv, "--out", &out.to_string_lossy());
    }
    let cli = crate::parse_from(&argv)
        .map_err(|e| CliError::Input(format!("manifest argv does not parse: {e}")))?;
    if matches!(cli.command, Command::Rerun(_)) {
        return Err(CliError::Input("a manifest cannot record a rerun".into()));
    }
    run(cli, &argv)
}
