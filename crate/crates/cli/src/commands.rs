//! One dispatcher per subcommand. Each loads inputs, calls the core library
//! and renders a table or transcript.

use std::path::Path;

use qsr_core::entropy::{
    conditional_entropy, conditional_mutual_information, hypothesis_testing_relative_entropy,
    iid_hypothesis_testing, max_relative_entropy, mutual_information, relative_entropy,
    relative_entropy_of_coherence, second_order_rate, von_neumann_entropy, EntropicValue,
};
use qsr_core::protocols::{
    coherence_creation, convex_split_bound_check, qsr_full, CreationOptions, QsrInstance, ROLES,
};
use qsr_core::qmat::{
    fidelity, purified_distance, DensityOperator, RegisterSystem, StateVector, C64,
};
use qsr_core::random;
use qsr_core::rates::{
    classical_rate_incoherent, incoherent_schumacher_rate, tensor_power, RateReport,
};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, CliResult, ExitStatus};
use crate::output::{render_transcript, Cell, Table};
use crate::state_io::read_state;
use crate::{
    ConvexSplitArgs, QsrArgs, QuantityArgs, QuantityName, RatesArgs, RunConfig, SimulateCommand,
    SweepCommand,
};

/// Rendered output plus the exit status it warrants.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub text: String,
    pub status: ExitStatus,
}

impl From<String> for Output {
    fn from(text: String) -> Self {
        Self {
            text,
            status: ExitStatus::Ok,
        }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Haar-random pure state on qubit registers `R, A, B, C`.
pub fn random_rabc(seed: u64) -> StateVector {
    random::pure_state(
        &mut rng(seed),
        RegisterSystem::qubits(&ROLES).expect("distinct labels"),
    )
}

/// Random rank-≤2 state on qubits `P, Q` and `σ_Q = ½·I/2 + ½·τ` with `τ` Haar-random pure.
pub fn random_split_pair(seed: u64) -> (DensityOperator, DensityOperator) {
    let mut rng = rng(seed);
    let rho = random::mixed_state(
        &mut rng,
        RegisterSystem::qubits(&["P", "Q"]).expect("distinct labels"),
        2,
    );
    let q = RegisterSystem::qubits(&["Q"]).expect("single label");
    let tau = random::pure_state(&mut rng, q.clone()).to_density();
    let mixed = DensityOperator::maximally_mixed(q.clone());
    let sigma = DensityOperator::new(q, &mixed.matrix().scale(0.5) + &tau.matrix().scale(0.5))
        .expect("convex mixture");
    (rho, sigma)
}

fn load_pure_or_random(file: Option<&Path>, seed: u64) -> CliResult<StateVector> {
    match file {
        Some(p) => Ok(read_state(p)?.pure("redistribution input")?.clone()),
        None => Ok(random_rabc(seed)),
    }
}

/// `R+A,C` → `[["R","A"],["C"]]`.
fn parse_parts(spec: &str) -> Vec<Vec<&str>> {
    spec.split(',')
        .map(|part| {
            part.split('+')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .collect()
        })
        .collect()
}

fn finite_or(cfg: &RunConfig, what: &str, v: EntropicValue) -> CliResult<f64> {
    if v.finite {
        Ok(v.value)
    } else if cfg.allow_inf {
        Ok(f64::INFINITY)
    } else {
        Err(CliError::Infinite(what.into()))
    }
}

fn quantity_label(name: QuantityName) -> &'static str {
    match name {
        QuantityName::Entropy => "entropy",
        QuantityName::Rc => "rc",
        QuantityName::Mi => "mi",
        QuantityName::Cond => "cond",
        QuantityName::Cmi => "cmi",
        QuantityName::D => "d",
        QuantityName::Dmax => "dmax",
        QuantityName::Dh => "dh",
        QuantityName::Fidelity => "fidelity",
        QuantityName::Pd => "pd",
    }
}

pub fn quantity(cfg: &RunConfig, args: &QuantityArgs) -> CliResult<String> {
    use QuantityName::*;
    let label = quantity_label(args.name);
    let binary = matches!(args.name, D | Dmax | Dh | Fidelity | Pd);
    let want_files = if binary { 2 } else { 1 };
    if args.files.len() != want_files {
        return Err(CliError::Usage(format!(
            "`{label}` takes {want_files} state file(s), got {}",
            args.files.len()
        )));
    }
    let states = args
        .files
        .iter()
        .map(|p| read_state(p))
        .collect::<CliResult<Vec<_>>>()?;
    let rho = states[0].density();
    let parts = args.parts.as_deref().map(parse_parts);
    let need_parts = |count: usize| -> CliResult<Vec<Vec<&str>>> {
        match &parts {
            Some(p) if p.len() == count && p.iter().all(|x| !x.is_empty()) => Ok(p.clone()),
            _ => Err(CliError::Usage(format!(
                "`{label}` needs --parts with {count} comma-separated parts"
            ))),
        }
    };
    let value = match args.name {
        Entropy => von_neumann_entropy(&rho),
        Rc => relative_entropy_of_coherence(&rho),
        Mi => {
            let p = need_parts(2)?;
            mutual_information(&rho, &p[0], &p[1])?
        }
        Cond => {
            let p = need_parts(2)?;
            conditional_entropy(&rho, &p[0], &p[1])?
        }
        Cmi => {
            let p = need_parts(3)?;
            conditional_mutual_information(&rho, &p[0], &p[1], &p[2])?
        }
        D | Dmax | Dh | Fidelity | Pd => {
            let sigma = states[1].density();
            match args.name {
                D => finite_or(cfg, label, relative_entropy(&rho, &sigma)?)?,
                Dmax => finite_or(cfg, label, max_relative_entropy(&rho, &sigma)?)?,
                Dh => finite_or(
                    cfg,
                    label,
                    hypothesis_testing_relative_entropy(&rho, &sigma, args.eps)?,
                )?,
                Fidelity => fidelity(&rho, &sigma)?,
                _ => purified_distance(&rho, &sigma)?,
            }
        }
    };
    let mut table = Table::new(&["quantity", "value"]);
    table.push(vec![label.into(), value.into()]);
    Ok(table.render(cfg.format))
}

/// Column names of a rate report row.
pub fn rate_headers() -> Vec<&'static str> {
    RateReport::FIELDS
        .iter()
        .copied()
        .chain(["units"])
        .collect()
}

fn rate_row(report: &RateReport, per: f64) -> Vec<Cell> {
    report
        .values()
        .iter()
        .map(|v| Cell::Num(v / per))
        .chain([report.units.as_str().into()])
        .collect()
}

pub fn rates(cfg: &RunConfig, args: &RatesArgs) -> CliResult<String> {
    let psi = load_pure_or_random(args.file.as_deref(), cfg.seed)?;
    let report = RateReport::compute_within(&psi, cfg.budget)?.in_units(cfg.units.into());
    let mut table = Table::new(&rate_headers());
    table.push(rate_row(&report, 1.0));
    Ok(table.render(cfg.format))
}

fn split_inputs(
    cfg: &RunConfig,
    args: &ConvexSplitArgs,
) -> CliResult<(DensityOperator, DensityOperator)> {
    let (default_rho, default_sigma) = random_split_pair(cfg.seed);
    let rho = args
        .state
        .as_deref()
        .map(read_state)
        .transpose()?
        .map_or(default_rho, |s| s.density());
    let sigma = args
        .sigma
        .as_deref()
        .map(read_state)
        .transpose()?
        .map_or(default_sigma, |s| s.density());
    Ok((rho, sigma))
}

const SPLIT_HEADERS: [&str; 6] = ["delta", "eps", "k", "n", "fidelity_sq", "bound"];

fn split_row(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    eps: f64,
    delta: f64,
    budget: usize,
) -> CliResult<Vec<Cell>> {
    let c = convex_split_bound_check(rho, sigma, eps, delta, budget)?;
    Ok(vec![
        delta.into(),
        eps.into(),
        c.k.into(),
        c.n.into(),
        c.fidelity_sq.into(),
        c.bound.into(),
    ])
}

fn qsr_instance(cfg: &RunConfig, args: &QsrArgs) -> CliResult<QsrInstance> {
    let psi = load_pure_or_random(args.file.as_deref(), cfg.seed)?;
    let mut inst = QsrInstance::new(psi, args.eps1, args.eps2, args.gamma)?.with_budget(cfg.budget);
    if let Some(path) = &args.sigma {
        inst = inst.with_sigma(read_state(path)?.density())?;
    }
    if let Some(n) = args.n_override {
        inst = inst.with_n_override(n)?;
    }
    if let Some(b) = args.b_override {
        inst = inst.with_b_override(b)?;
    }
    Ok(inst)
}

pub fn simulate(cfg: &RunConfig, sim: &SimulateCommand) -> CliResult<String> {
    match sim {
        SimulateCommand::CoherenceCreation { q, e, snapshots } => {
            let t = coherence_creation(
                *q,
                *e,
                CreationOptions {
                    budget: cfg.budget,
                    snapshots: *snapshots,
                },
            )?;
            Ok(render_transcript(&t, cfg.format, *snapshots))
        }
        SimulateCommand::ConvexSplit(args) => {
            let (rho, sigma) = split_inputs(cfg, args)?;
            let mut table = Table::new(&SPLIT_HEADERS);
            table.push(split_row(&rho, &sigma, args.eps, args.delta, cfg.budget)?);
            Ok(table.render(cfg.format))
        }
        SimulateCommand::Qsr(args) => {
            let run = qsr_full(&qsr_instance(cfg, args)?)?;
            Ok(render_transcript(&run.transcript, cfg.format, false))
        }
    }
}

fn empty_range(spec: &str) -> CliError {
    CliError::Usage(format!("sweep range `{spec}` is empty"))
}

/// `a..b` (inclusive) or a comma-separated list.
pub fn parse_counts(spec: &str) -> CliResult<Vec<usize>> {
    let bad =
        |e: std::num::ParseIntError| CliError::Usage(format!("bad sweep value in `{spec}`: {e}"));
    let values: Vec<usize> = match spec.split_once("..") {
        Some((lo, hi)) => {
            let (lo, hi) = (
                lo.trim().parse().map_err(bad)?,
                hi.trim().parse().map_err(bad)?,
            );
            (lo..=hi).collect()
        }
        None => spec
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse().map_err(bad))
            .collect::<CliResult<_>>()?,
    };
    if values.is_empty() {
        return Err(empty_range(spec));
    }
    Ok(values)
}

pub fn parse_reals(spec: &str) -> CliResult<Vec<f64>> {
    let values: Vec<f64> = spec
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|e| CliError::Usage(format!("bad sweep value in `{spec}`: {e}")))
        })
        .collect::<CliResult<_>>()?;
    if values.is_empty() {
        return Err(empty_range(spec));
    }
    Ok(values)
}

/// Maps `f` over `items` on a scoped worker pool; results keep input order
/// and the first error by index wins.
pub fn ordered_map<T: Sync, R: Send>(
    items: &[T],
    f: impl Fn(&T) -> CliResult<R> + Sync,
) -> CliResult<Vec<R>> {
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .clamp(1, items.len().max(1));
    let chunk = items.len().div_ceil(workers).max(1);
    let f = &f;
    let per_chunk: Vec<Vec<CliResult<R>>> = std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| s.spawn(move || c.iter().map(f).collect()))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    per_chunk.into_iter().flatten().collect()
}

pub fn sweep(cfg: &RunConfig, sweep: &SweepCommand) -> CliResult<String> {
    let table = match sweep {
        SweepCommand::Copies { file, values } => {
            let ns = parse_counts(values)?;
            let psi = load_pure_or_random(file.as_deref(), cfg.seed)?;
            let mut headers = vec!["n"];
            headers.extend(rate_headers());
            let rows = ordered_map(&ns, |&n| {
                let report = RateReport::compute_within(&tensor_power(&psi, n)?, cfg.budget)?
                    .in_units(cfg.units.into());
                Ok([Cell::from(n)]
                    .into_iter()
                    .chain(rate_row(&report, n as f64))
                    .collect())
            })?;
            Table {
                headers: headers.iter().map(|h| (*h).to_string()).collect(),
                rows,
            }
        }
        SweepCommand::Delta { split, values } => {
            let deltas = parse_reals(values)?;
            let (rho, sigma) = split_inputs(cfg, split)?;
            let rows = ordered_map(&deltas, |&delta| {
                split_row(&rho, &sigma, split.eps, delta, cfg.budget)
            })?;
            let mut t = Table::new(&SPLIT_HEADERS);
            t.rows = rows;
            t
        }
        SweepCommand::Hypothesis {
            rho,
            sigma,
            eps,
            values,
        } => {
            let ns = parse_counts(values)?;
            let qubit = RegisterSystem::qubits(&["X"]).expect("single label");
            let rho = match rho {
                Some(p) => read_state(p)?.density(),
                None => DensityOperator::from_diagonal(qubit.clone(), &[0.9, 0.1])?,
            };
            let sigma = match sigma {
                Some(p) => read_state(p)?.density(),
                None => DensityOperator::maximally_mixed(qubit),
            };
            let d = finite_or(cfg, "relative entropy", relative_entropy(&rho, &sigma)?)?;
            let rows = ordered_map(&ns, |&n| {
                let total = finite_or(
                    cfg,
                    "dh",
                    iid_hypothesis_testing(&rho, &sigma, n, *eps, cfg.budget)?,
                )?;
                let expansion = second_order_rate(&rho, &sigma, n, *eps)?;
                let nf = n as f64;
                Ok(vec![
                    n.into(),
                    (*eps).into(),
                    (total / nf).into(),
                    (expansion / nf).into(),
                    d.into(),
                    (total - expansion).abs().into(),
                ])
            })?;
            let mut t = Table::new(&[
                "n",
                "eps",
                "rate",
                "expansion",
                "relative_entropy",
                "n_times_gap",
            ]);
            t.rows = rows;
            t
        }
        SweepCommand::Block { qsr, values } => {
            let bs = parse_counts(values)?;
            let base = qsr_instance(cfg, qsr)?;
            let rows = ordered_map(&bs, |&b| {
                let run = qsr_full(&base.clone().with_b_override(b)?)?;
                let p = &run.parameters;
                Ok(vec![
                    b.into(),
                    p.n.into(),
                    u64::from(p.cobits).into(),
                    run.final_distance.into(),
                    run.p1_distance.into(),
                    run.decoder_bound.into(),
                    run.guaranteed_distance.into(),
                ])
            })?;
            let mut t = Table::new(&[
                "b",
                "n",
                "cobits",
                "final_distance",
                "p1_distance",
                "decoder_bound",
                "guaranteed_distance",
            ]);
            t.rows = rows;
            t
        }
    };
    Ok(table.render(cfg.format))
}

fn check(table: &mut Table, name: &str, outcome: CliResult<(bool, String)>) -> bool {
    let (pass, detail) = outcome.unwrap_or_else(|e| (false, e.to_string()));
    table.push(vec![
        name.into(),
        if pass { "PASS" } else { "FAIL" }.into(),
        detail.into(),
    ]);
    pass
}

fn basis_state(labels: &[&str], amps: &[(usize, f64)]) -> CliResult<StateVector> {
    let sys = RegisterSystem::qubits(labels)?;
    let mut v = vec![C64::new(0.0, 0.0); sys.dim()];
    for &(i, a) in amps {
        v[i] = C64::new(a, 0.0);
    }
    Ok(StateVector::new(sys, v)?)
}

/// Runs a fixed battery of small checks; any failure gives exit status 4.
pub fn selftest(cfg: &RunConfig) -> CliResult<Output> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut table = Table::new(&["check", "status", "detail"]);
    let mut ok = true;

    ok &= check(
        &mut table,
        "coherence creation (q=2, e=1)",
        (|| {
            let t = coherence_creation(
                2,
                1,
                CreationOptions {
                    budget: cfg.budget,
                    snapshots: false,
                },
            )?;
            let c = t.counters.coherent_qubits_out;
            Ok((
                c == 3 && t.achieved_fidelity >= 1.0 - 1e-9,
                format!("c={c} fidelity={}", t.achieved_fidelity),
            ))
        })(),
    );

    ok &= check(
        &mut table,
        "incoherent Schumacher on |+>",
        (|| {
            let plus = basis_state(&["C"], &[(0, h), (1, h)])?;
            let q = incoherent_schumacher_rate(&plus.to_density())?;
            let c = classical_rate_incoherent(&plus)?;
            Ok((
                (q - 0.5).abs() < 1e-12 && (c - 1.0).abs() < 1e-12,
                format!("Q={q} classical={c}"),
            ))
        })(),
    );

    ok &= check(
        &mut table,
        "GHZ conditional mutual information",
        (|| {
            let ghz = basis_state(&["R", "B", "C"], &[(0, h), (7, h)])?.to_density();
            let v = conditional_mutual_information(&ghz, &["R"], &["C"], &["B"])?;
            Ok(((v - 1.0).abs() < 1e-9, format!("I(R:C|B)={v}")))
        })(),
    );

    ok &= check(
        &mut table,
        "convex split bound (delta=0.25)",
        (|| {
            let (rho, sigma) = random_split_pair(cfg.seed);
            let c = convex_split_bound_check(&rho, &sigma, 0.0, 0.25, cfg.budget)?;
            Ok((
                c.fidelity_sq >= c.bound - 1e-8,
                format!("n={} F^2={} bound={}", c.n, c.fidelity_sq, c.bound),
            ))
        })(),
    );

    ok &= check(
        &mut table,
        "i.i.d. hypothesis testing routes",
        (|| {
            let x = RegisterSystem::qubits(&["X"])?;
            let rho = DensityOperator::from_diagonal(x.clone(), &[0.7, 0.3])?;
            let sigma = DensityOperator::from_diagonal(x, &[0.2, 0.8])?;
            let iid = iid_hypothesis_testing(&rho, &sigma, 1, 0.1, cfg.budget)?.value;
            let single = hypothesis_testing_relative_entropy(&rho, &sigma, 0.1)?.value;
            Ok(((iid - single).abs() < 1e-12, format!("{iid} vs {single}")))
        })(),
    );

    ok &= check(
        &mut table,
        "redistribution of a coherent C",
        (|| {
            let psi = basis_state(&["R", "B"], &[(0, h), (3, h)])?
                .tensor(&basis_state(&["C"], &[(0, h), (1, h)])?)?;
            let run = qsr_full(&QsrInstance::new(psi, 0.8, 0.1, 0.1)?.with_budget(cfg.budget))?;
            Ok((
                run.final_distance <= run.guaranteed_distance,
                format!("P={} bound={}", run.final_distance, run.guaranteed_distance),
            ))
        })(),
    );

    let status = if ok {
        ExitStatus::Ok
    } else {
        ExitStatus::BoundViolated
    };
    Ok(Output {
        text: table.render(cfg.format),
        status,
    })
}
