//! Command-line front end: certification suites and figure data as
//! deterministic CSV or JSON.
//!
//! The worker count of parallel sweeps is read from `BOSECOOL_WORKERS`.
//! Random trials use ChaCha8 seeded with `--seed`.

mod output;

use anyhow::{bail, Context};
use bosecool::asymptotic::{asymptotic_small_alpha, em_ratios, method_agreement, AsymptoticMethod};
use bosecool::cooling::{cop_local_minima, linspace, sweep_alpha, SpecFamily};
use bosecool::entropy::{
    check_superstochastic, counterexample_matrix, second_law_verdict, StochasticVerdict, TransferMatrix,
};
use bosecool::fock::ThermalSpec;
use bosecool::linear::{
    delta_total_number, dispersion_sum, propagate_moments, random_bogoliubov_with, BogoliubovMap, MomentState,
};
use bosecool::nonlinear::{
    enumerate_second_order_terms, exact_evolve, perturbative_delta_n, resonance_scan, CoefficientSet,
    MonomialTable, NonlinearConfig, Variant,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use output::{Cell, Format, Report};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

const WORKERS_ENV: &str = "BOSECOOL_WORKERS";

#[derive(Parser)]
#[command(name = "bosecool", version, about = "Heating and cooling of bosonic modes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Random linear maps: occupation monotonicity and the dispersion bridge.
    LinearCertify(LinearArgs),
    /// Random linear maps: Bose-entropy certificates and measured change.
    EntropyCertify(EntropyArgs),
    /// Optimal permutation cooling over a frequency-ratio grid.
    OptimalSweep(SweepArgs),
    /// Second-order (and optionally exact) nonlinear cooling over alpha.
    NonlinearScan(NonlinearArgs),
    /// Small-alpha asymptotics by direct sums and Fourier quadrature.
    Asymptotics(AsymptoticArgs),
    /// Count the nonvanishing second-order trace terms.
    EnumerateTerms(EnumerateArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct LinearArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..=16))]
    modes: u64,
    #[arg(long, default_value_t = 1.5)]
    squeeze: f64,
    #[arg(long, default_value_t = 1.0)]
    displacement: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct EntropyArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=8))]
    modes: u64,
    #[arg(long, default_value_t = 1.5)]
    squeeze: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 0.6)]
    y_alpha: f64,
    #[arg(long, default_value_t = 0.02)]
    alpha_min: f64,
    #[arg(long, default_value_t = 0.98)]
    alpha_max: f64,
    #[arg(long, default_value_t = 480)]
    steps: usize,
    #[arg(long, default_value_t = 300)]
    blocks: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScanMode {
    Perturbative,
    Exact,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Coefficients {
    Printed,
    Derived,
}

#[derive(Args)]
struct NonlinearArgs {
    /// `omega1` in rescaled units (`beta = 1`).
    #[arg(long, default_value_t = 0.35)]
    omega1: f64,
    #[arg(long, default_value_t = 10.0 * std::f64::consts::PI)]
    time: f64,
    #[arg(long, default_value_t = 0.01)]
    coupling: f64,
    #[arg(long, default_value_t = 0.1)]
    alpha_min: f64,
    #[arg(long, default_value_t = 3.0)]
    alpha_max: f64,
    #[arg(long, default_value_t = 290)]
    steps: usize,
    #[arg(long, value_enum, default_value_t = ScanMode::Perturbative)]
    mode: ScanMode,
    #[arg(long, value_enum, default_value_t = Coefficients::Printed)]
    coefficients: Coefficients,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct AsymptoticArgs {
    #[arg(long, default_value_t = 10.0)]
    beta_omega1: f64,
    #[arg(long, default_value_t = 0.007)]
    eps_min: f64,
    #[arg(long, default_value_t = 1.0)]
    eps_max: f64,
    /// Geometric grid intervals between `eps-min` and `eps-max`.
    #[arg(long, default_value_t = 40)]
    steps: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long, default_value_t = 2)]
    order: usize,
    #[arg(long, value_delimiter = ',', default_value = "20,30")]
    cutoffs: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    omega1: f64,
    #[arg(long, default_value_t = 0.5)]
    omega2: f64,
    #[command(flatten)]
    output: OutputArgs,
}

/// A finished run: its output and the invariant violations it found.
struct Run {
    report: Report,
    violations: Vec<String>,
}

fn linear_certify(a: &LinearArgs) -> anyhow::Result<Run> {
    let n = a.modes as usize;
    let mut report = Report::new("linear-certify");
    report
        .param("seed", a.seed)
        .param("trials", a.trials)
        .param("modes", n)
        .param("squeeze", output::float(a.squeeze))
        .param("displacement", output::float(a.displacement));
    report.columns = vec![
        "trial", "f_term", "r_term", "y_term", "total", "propagated", "dispersion_change", "ok",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut violations = Vec::new();
    for trial in 0..a.trials as usize {
        let map = random_bogoliubov_with(n, a.squeeze, a.displacement, &mut rng)?;
        let occ: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..3.0)).collect();
        let state = MomentState::diagonal(&occ);
        let d = delta_total_number(&map, &state)?;
        let after = propagate_moments(&map, &state)?;
        let dd = dispersion_sum(&after)? - dispersion_sum(&state)?;
        let f2: f64 = map.f.iter().map(|z| z.norm_sqr()).sum();
        // dispersion excludes the coherent part |<b>|^2 = |f|^2
        let ok = d.total >= -1e-9 && (d.total - d.propagated).abs() <= 1e-10 && (dd + f2 - d.total).abs() <= 1e-10;
        if !ok {
            violations.push(format!(
                "trial {trial}: {}",
                json!({"map": map, "occupations": occ, "decomposition": d})
            ));
        }
        report.rows.push(vec![
            trial.into(),
            d.f_term.into(),
            d.r_term.into(),
            d.y_term.into(),
            d.total.into(),
            d.propagated.into(),
            dd.into(),
            ok.into(),
        ]);
    }
    report.summary("violations", json!(violations.len()));
    Ok(Run { report, violations })
}

fn entropy_certify(a: &EntropyArgs) -> anyhow::Result<Run> {
    let n = a.modes as usize;
    let mut report = Report::new("entropy-certify");
    report
        .param("seed", a.seed)
        .param("trials", a.trials)
        .param("modes", n)
        .param("squeeze", output::float(a.squeeze));
    report.columns = vec!["kind", "trial", "verdict", "min_slack", "delta_s", "witness"];
    let mut violations = Vec::new();

    let fixture = check_superstochastic(&TransferMatrix::from_entries(counterexample_matrix())?)?;
    let witness = fixture.witness.as_ref().map(|(i, j)| {
        let one_based = |v: &[usize]| v.iter().map(|x| (x + 1).to_string()).collect::<Vec<_>>().join(" ");
        format!("I={{{}}} J={{{}}}", one_based(i), one_based(j))
    });
    if fixture.verdict != StochasticVerdict::NotSuperstochastic || fixture.witness != Some((vec![1, 2], vec![0, 1])) {
        violations.push(format!("fixture certificate: {:?}", fixture.witness));
    }
    report.rows.push(vec![
        "fixture".into(),
        Cell::Empty,
        "not_superstochastic".into(),
        fixture.min_slack.into(),
        Cell::Empty,
        witness.into(),
    ]);

    let occ0: Vec<f64> = (1..=n).map(|k| k as f64).collect();
    let id = second_law_verdict(&BogoliubovMap::identity(n), &MomentState::diagonal(&occ0))?;
    if id.delta_s.abs() > 1e-12 {
        violations.push(format!("identity map changed the entropy by {:e}", id.delta_s));
    }
    report.rows.push(vec![
        "identity".into(),
        Cell::Empty,
        id.guarantee.label().into(),
        id.certificate.min_slack.into(),
        id.delta_s.into(),
        Cell::Empty,
    ]);

    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut counts = [0usize; 3];
    for trial in 0..a.trials as usize {
        let map = random_bogoliubov_with(n, a.squeeze, 0.0, &mut rng)?;
        let occ: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..4.0)).collect();
        let r = second_law_verdict(&map, &MomentState::diagonal(&occ))?;
        let label = r.guarantee.label();
        counts[["dss", "nor", "none"].iter().position(|l| *l == label).unwrap_or(2)] += 1;
        if label != "none" && r.delta_s < -1e-9 {
            violations.push(format!(
                "trial {trial}: certified {label} but dS = {:e}: {}",
                r.delta_s,
                json!({"map": map, "occupations": occ})
            ));
        }
        report.rows.push(vec![
            "random".into(),
            trial.into(),
            label.into(),
            r.certificate.min_slack.into(),
            r.delta_s.into(),
            Cell::Empty,
        ]);
    }
    report
        .summary("dss", json!(counts[0]))
        .summary("nor", json!(counts[1]))
        .summary("none", json!(counts[2]))
        .summary("violations", json!(violations.len()));
    Ok(Run { report, violations })
}

fn optimal_sweep(a: &SweepArgs) -> anyhow::Result<Run> {
    if !(0.0 < a.alpha_min && a.alpha_min <= a.alpha_max && a.alpha_max < 1.0) {
        bail!("need 0 < alpha-min <= alpha-max < 1");
    }
    let mut report = Report::new("optimal-sweep");
    report
        .param("y_alpha", output::float(a.y_alpha))
        .param("alpha_min", output::float(a.alpha_min))
        .param("alpha_max", output::float(a.alpha_max))
        .param("steps", a.steps)
        .param("blocks", a.blocks);
    report.columns = vec![
        "alpha", "blocks", "dn", "dn1", "dn2", "energy_cost", "cop", "efficiency", "otto_bound", "converged",
    ];
    let rows = sweep_alpha(SpecFamily::FixedYAlpha(a.y_alpha), &linspace(a.alpha_min, a.alpha_max, a.steps), a.blocks)?;
    let mut violations = Vec::new();
    for row in &rows {
        let r = &row.report;
        if !(r.dn < 0.0 && r.efficiency <= 1.0 - row.alpha + 1e-12 && r.chain_holds(1e-12)) {
            violations.push(format!("alpha {}: {r:?}", row.alpha));
        }
        report.rows.push(vec![
            row.alpha.into(),
            row.blocks.into(),
            r.dn.into(),
            r.dn1.into(),
            r.dn2.into(),
            r.energy_cost.into(),
            r.cop.value().into(),
            r.efficiency.into(),
            r.otto_bound.into(),
            row.converged.into(),
        ]);
    }
    report
        .summary("cop_local_minima", json!(cop_local_minima(&rows)))
        .summary("violations", json!(violations.len()));
    Ok(Run { report, violations })
}

fn nonlinear_scan(a: &NonlinearArgs) -> anyhow::Result<Run> {
    if !(a.omega1 > 0.0 && a.time >= 0.0 && a.coupling >= 0.0 && 0.0 < a.alpha_min && a.alpha_min <= a.alpha_max) {
        bail!("need positive omega1, alpha range and non-negative time and coupling");
    }
    let set = match a.coefficients {
        Coefficients::Printed => CoefficientSet::Printed,
        Coefficients::Derived => CoefficientSet::Derived,
    };
    let mut report = Report::new("nonlinear-scan");
    report
        .param("omega1", output::float(a.omega1))
        .param("time", output::float(a.time))
        .param("coupling", output::float(a.coupling))
        .param("alpha_min", output::float(a.alpha_min))
        .param("alpha_max", output::float(a.alpha_max))
        .param("steps", a.steps)
        .param("mode", format!("{:?}", a.mode).to_lowercase())
        .param("coefficients", format!("{:?}", a.coefficients).to_lowercase());
    report.columns = vec![
        "alpha",
        "dn_pert",
        "dn1_pert",
        "dn2_pert",
        "dn_exact",
        "dn1_exact",
        "dn2_exact",
        "remainder_ratio",
        "validity_warning",
    ];
    let alphas = linspace(a.alpha_min, a.alpha_max, a.steps);
    let scan = resonance_scan(a.omega1, a.time, a.coupling, &alphas, set)?;
    let config = |alpha: f64, g: f64| NonlinearConfig::rescaled(a.omega1, alpha * a.omega1, g, a.time, Variant::Full);
    let exact: Vec<Option<(f64, f64, f64, Option<f64>)>> = if a.mode == ScanMode::Perturbative {
        vec![None; alphas.len()]
    } else {
        alphas
            .par_iter()
            .map(|&alpha| -> anyhow::Result<_> {
                let e = exact_evolve(&config(alpha, a.coupling)?, None)
                    .with_context(|| format!("exact evolution at alpha {alpha}"))?;
                let ratio = if a.mode == ScanMode::Both {
                    let half = config(alpha, 0.5 * a.coupling)?;
                    let eh = exact_evolve(&half, None)?;
                    let full_rem = e.report.dn - perturbative_delta_n(&config(alpha, a.coupling)?, set)?.dn;
                    let half_rem = eh.report.dn - perturbative_delta_n(&half, set)?.dn;
                    Some((full_rem / half_rem).abs())
                } else {
                    None
                };
                Ok(Some((e.report.dn1, e.report.dn2, e.energy_change, ratio)))
            })
            .collect::<anyhow::Result<_>>()?
    };
    let mut violations = Vec::new();
    for (row, ex) in scan.rows.iter().zip(&exact) {
        let warning = config(row.alpha, a.coupling)?.validity_warning();
        if let Some((_, _, energy, _)) = ex {
            if *energy < -1e-9 {
                violations.push(format!("alpha {}: exact energy change {energy:e} < 0", row.alpha));
            }
        }
        report.rows.push(vec![
            row.alpha.into(),
            row.dn.into(),
            row.dn1.into(),
            row.dn2.into(),
            ex.map(|e| e.0 + e.1).into(),
            ex.map(|e| e.0).into(),
            ex.map(|e| e.1).into(),
            ex.and_then(|e| e.3).into(),
            warning.into(),
        ]);
    }
    report
        .summary("sign_changes", json!(scan.sign_changes))
        .summary("cooling_windows", json!(scan.cooling_windows()))
        .summary("violations", json!(violations.len()));
    Ok(Run { report, violations })
}

fn asymptotics(a: &AsymptoticArgs) -> anyhow::Result<Run> {
    if !(0.0 < a.eps_min && a.eps_min <= a.eps_max && a.beta_omega1 > 0.0) {
        bail!("need 0 < eps-min <= eps-max and beta-omega1 > 0");
    }
    let mut report = Report::new("asymptotics");
    report
        .param("beta_omega1", output::float(a.beta_omega1))
        .param("eps_min", output::float(a.eps_min))
        .param("eps_max", output::float(a.eps_max))
        .param("steps", a.steps);
    report.columns = vec![
        "epsilon",
        "alpha",
        "dn1",
        "dn2",
        "dn",
        "cop",
        "efficiency",
        "method_agreement",
        "em_ratio1",
        "em_ratio2",
        "error",
    ];
    let eps: Vec<f64> = if a.steps == 0 {
        vec![a.eps_min]
    } else {
        (0..=a.steps)
            .map(|i| a.eps_min * (a.eps_max / a.eps_min).powf(i as f64 / a.steps as f64))
            .collect()
    };
    let rows: Vec<Vec<Cell>> = eps
        .par_iter()
        .map(|&e| {
            let computed = (|| {
                let r = asymptotic_small_alpha(a.beta_omega1, e, AsymptoticMethod::DirectSum)?;
                let agreement = method_agreement(a.beta_omega1, e)?;
                let em = em_ratios(a.beta_omega1, e)?;
                bosecool::Result::Ok((r, agreement, em))
            })();
            match computed {
                Ok((r, agreement, em)) => vec![
                    e.into(),
                    r.report.alpha.into(),
                    r.report.dn1.into(),
                    r.report.dn2.into(),
                    r.report.dn.into(),
                    r.report.cop.value().into(),
                    r.report.efficiency.into(),
                    agreement.into(),
                    em.0.into(),
                    em.1.into(),
                    Cell::Empty,
                ],
                Err(err) => {
                    let mut row = vec![e.into(), (e / a.beta_omega1).into()];
                    row.extend(std::iter::repeat_n(Cell::Empty, 8));
                    row.push(err.to_string().into());
                    row
                }
            }
        })
        .collect();
    let mut violations = Vec::new();
    for row in &rows {
        match (&row[7], &row[10]) {
            (Cell::F(x), _) if *x > 1e-6 => violations.push(format!("eps {:?}: method agreement {x:e}", row[0])),
            (_, Cell::S(err)) => violations.push(format!("eps {:?}: {err}", row[0])),
            _ => {}
        }
    }
    report.rows = rows;
    report.summary("violations", json!(violations.len()));
    Ok(Run { report, violations })
}

fn enumerate_terms(a: &EnumerateArgs) -> anyhow::Result<Run> {
    let spec = ThermalSpec::two_mode_ordered(a.omega1, a.omega2, 1.0)?;
    let e = enumerate_second_order_terms(&spec, &a.cutoffs, a.order)?;
    let table = MonomialTable::new(a.omega1, a.omega2);
    let labels = |idx: &[usize]| {
        if idx.is_empty() {
            "1".to_string()
        } else {
            idx.iter()
                .map(|&i| table.monomials[i].label())
                .collect::<Vec<_>>()
                .join(" * ")
        }
    };
    let mut report = Report::new("enumerate-terms");
    report
        .param("order", a.order)
        .param("cutoffs", format!("{:?}", a.cutoffs))
        .param("omega1", output::float(a.omega1))
        .param("omega2", output::float(a.omega2));
    report.columns = vec!["k", "k_prime", "left", "right", "theta", "trace_n1", "trace_n2", "hermitian"];
    for t in &e.terms {
        report.rows.push(vec![
            t.left.len().into(),
            t.right.len().into(),
            labels(&t.left).into(),
            labels(&t.right).into(),
            t.theta_label.clone().into(),
            t.trace_n1.into(),
            t.trace_n2.into(),
            t.hermitian.into(),
        ]);
    }
    let expected_total = 8usize.pow(a.order as u32) * (a.order + 1);
    let mut violations = Vec::new();
    if e.total != expected_total {
        violations.push(format!("total {} != {expected_total}", e.total));
    }
    if !e.all_hermitian {
        violations.push("a nonzero term has a non-Hermitian theta word".into());
    }
    report
        .summary("total", json!(e.total))
        .summary("nonzero", json!(e.nonzero))
        .summary("all_hermitian", json!(e.all_hermitian))
        .summary("splits", json!(e.splits))
        .summary("doubled_cutoffs", json!(e.doubled_cutoffs));
    report.extra = Some(json!({
        "total": e.total,
        "nonzero": e.nonzero,
        "all_hermitian": e.all_hermitian,
    }));
    Ok(Run { report, violations })
}

fn configure_workers() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v
            .parse()
            .with_context(|| format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))?;
        if n == 0 {
            bail!("{WORKERS_ENV} must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: &Cli) -> anyhow::Result<(Run, &OutputArgs, Format)> {
    configure_workers()?;
    Ok(match &cli.command {
        Command::LinearCertify(a) => (linear_certify(a)?, &a.output, Format::Csv),
        Command::EntropyCertify(a) => (entropy_certify(a)?, &a.output, Format::Csv),
        Command::OptimalSweep(a) => (optimal_sweep(a)?, &a.output, Format::Csv),
        Command::NonlinearScan(a) => (nonlinear_scan(a)?, &a.output, Format::Csv),
        Command::Asymptotics(a) => (asymptotics(a)?, &a.output, Format::Csv),
        Command::EnumerateTerms(a) => (enumerate_terms(a)?, &a.output, Format::Json),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|(r, out, default)| {
        output::write(&r.report, out.format.unwrap_or(default), out.out.as_deref())?;
        Ok(r.violations)
    });
    match result {
        Ok(violations) if violations.is_empty() => ExitCode::SUCCESS,
        Ok(violations) => {
            for v in &violations {
                eprintln!("violation: {v}");
            }
            ExitCode::from(1)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
