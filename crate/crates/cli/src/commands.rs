use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};

use staf_core::adp::{run_adp, AdpState, CostSpec, ValueModel};
use staf_core::analysis::{max_after, mean_after, periodic_deviation, range_after};
use staf_core::chase::{circular_target, run_chase, ChaseRecord};
use staf_core::dynamics::{circular_system, RegulatorSystem};
use staf_core::expbounds::{
    ball_grid, center_count_bound, monomial_approximant, sup_error, MultiIndex,
};
use staf_core::rkhs::ExponentialKernel;
use staf_core::Point;

use crate::config::{AdpSetup, ChaseSetup};
use crate::CliError;

fn open_output(path: Option<&str>) -> Result<csv::Writer<Box<dyn Write>>, CliError> {
    let sink: Box<dyn Write> = match path {
        Some(p) => {
            Box::new(BufWriter::new(File::create(p).map_err(|e| {
                CliError::Config(format!("cannot create {p}: {e}"))
            })?))
        }
        None => Box::new(io::stdout().lock()),
    };
    Ok(csv::Writer::from_writer(sink))
}

fn io_error(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("writing output: {e}"))
}

fn numbered(prefix: &str, count: usize) -> impl Iterator<Item = String> + '_ {
    (1..=count).map(move |i| format!("{prefix}{i}"))
}

/// Shortest round-trip form, switching to exponent notation for very small
/// or very large magnitudes.
fn num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn chase_row(r: &ChaseRecord) -> Vec<String> {
    let s = &r.state;
    let mut row = vec![num(s.t)];
    row.extend(s.x.iter().copied().map(num));
    row.extend(s.weights.iter().copied().map(num));
    row.extend(s.ideal.iter().copied().map(num));
    row.extend([
        num(s.error),
        num(r.target_value),
        num(r.estimate),
        num(r.pointwise_error()),
        num(s.contraction),
    ]);
    row
}

pub fn chase(setup: ChaseSetup) -> Result<(), CliError> {
    let ChaseSetup {
        config,
        centers,
        transient,
        out,
    } = setup;
    let m = centers.count();
    let trace = run_chase(
        &circular_system(),
        &ExponentialKernel::new(2),
        &circular_target,
        &centers,
        &config,
    )?;

    let mut writer = open_output(out.as_deref())?;
    let mut header = vec!["t".to_string(), "x1".into(), "x2".into()];
    header.extend(numbered("a", m));
    header.extend(numbered("w", m));
    header.extend(
        [
            "e_rkhs",
            "V_at_x",
            "Vhat_at_x",
            "pointwise_error",
            "delta_step",
        ]
        .map(String::from),
    );
    writer.write_record(&header).map_err(io_error)?;
    for r in &trace.records {
        writer.write_record(chase_row(r)).map_err(io_error)?;
    }
    writer.flush().map_err(io_error)?;

    let times: Vec<f64> = trace.records.iter().map(|r| r.state.t).collect();
    let pointwise: Vec<f64> = trace
        .records
        .iter()
        .map(ChaseRecord::pointwise_error)
        .collect();
    let errors: Vec<f64> = trace.records.iter().map(|r| r.state.error).collect();
    let values: Vec<f64> = trace.records.iter().map(|r| r.target_value.abs()).collect();
    let deviation = (0..m)
        .filter_map(|i| {
            let w: Vec<f64> = trace.records.iter().map(|r| r.state.weights[i]).collect();
            periodic_deviation(&times, &w, std::f64::consts::TAU, transient)
        })
        .reduce(f64::max);

    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "chase: {} steps at dt = {}",
        trace.records.len(),
        config.dt
    );
    let _ = writeln!(
        summary,
        "  max |pointwise error| after t > {transient}: {}",
        show(max_after(&times, &pointwise, transient))
    );
    let _ = writeln!(
        summary,
        "  range of |V| after t > {transient}: {}",
        show(range_after(&times, &values, transient))
    );
    let _ = writeln!(
        summary,
        "  mean e_rkhs: {}",
        show(mean_after(&times, &errors, transient))
    );
    let _ = writeln!(summary, "  per-cycle weight deviation: {}", show(deviation));
    if !trace.domain_excursions.is_empty() {
        let _ = writeln!(
            summary,
            "  warning: state left the domain box at {} steps (first at step {})",
            trace.domain_excursions.len(),
            trace.domain_excursions[0]
        );
    }
    eprint!("{summary}");
    Ok(())
}

fn show(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6e}"))
        .unwrap_or_else(|| "n/a".into())
}

fn adp_row(s: &AdpState) -> Vec<String> {
    let mut row = vec![num(s.t)];
    row.extend(s.x.iter().copied().map(num));
    row.extend(s.actor.iter().copied().map(num));
    row.extend(s.critic.iter().copied().map(num));
    row.extend([
        num(s.bellman_error),
        fmt_opt(s.value_error),
        fmt_opt(s.control_error),
    ]);
    row
}

pub fn adp(setup: AdpSetup) -> Result<(), CliError> {
    let AdpSetup {
        config,
        centers,
        convention,
        drift,
        out,
    } = setup;
    let m = centers.count();
    let model = ValueModel::new(centers, convention);
    let system = RegulatorSystem { drift };
    let trace = run_adp(&system, &CostSpec::identity(2, 1), &model, &config)?;

    let mut writer = open_output(out.as_deref())?;
    let mut header = vec!["t".to_string(), "x1".into(), "x2".into()];
    header.extend(numbered("Wa", m));
    header.extend(numbered("Wc", m));
    header.extend(["bellman_error", "value_error", "control_error"].map(String::from));
    writer.write_record(&header).map_err(io_error)?;
    for s in &trace {
        writer.write_record(adp_row(s)).map_err(io_error)?;
    }
    writer.flush().map_err(io_error)?;

    match trace.last() {
        Some(last) => {
            let gap =
                (&last.actor - &last.critic).norm() / last.critic.norm().max(f64::MIN_POSITIVE);
            eprintln!("adp: {} steps at dt = {}", trace.len(), config.dt);
            eprintln!("  final ||x||: {:.6e}", last.x.norm());
            eprintln!("  final ||Wa - Wc|| / ||Wc||: {gap:.6e}");
            eprintln!("  final Wc: {:?}", last.critic.as_slice());
        }
        None => eprintln!("adp: 0 steps"),
    }
    Ok(())
}

pub fn monomial(alpha: Vec<u32>, scales: Vec<u32>, radius: f64) -> Result<(), CliError> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(CliError::Config("--r must be positive".into()));
    }
    if scales.is_empty() {
        return Err(CliError::Config("--m needs at least one value".into()));
    }
    let alpha = MultiIndex::new(alpha)?;
    let n = alpha.dimension();
    let origin = Point::zeros(n);
    // keep the grid near 10^5 points whatever the dimension
    let per_axis = ((1e5f64).powf(1.0 / n as f64) as usize).clamp(3, 2001);
    let grid = ball_grid(&origin, radius, per_axis);
    let target = |y: &Point| alpha.monomial(y);

    let mut out = io::stdout().lock();
    writeln!(
        out,
        "alpha = {:?}, r = {radius}, {} grid points",
        alpha.components(),
        grid.len()
    )
    .map_err(io_error)?;
    writeln!(
        out,
        "{:>8} {:>8} {:>14} {:>8} {:>12}",
        "m", "terms", "sup_error", "ratio", "max_dist"
    )
    .map_err(io_error)?;
    let mut previous: Option<f64> = None;
    let mut warnings = Vec::new();
    for &m in &scales {
        let approx = monomial_approximant(&alpha, m)?;
        let err = sup_error(&approx, target, &grid);
        let ratio = match previous {
            Some(p) if err > 0.0 => format!("{:.3}", p / err),
            _ => "-".into(),
        };
        let dist = approx.max_center_distance(&origin);
        writeln!(
            out,
            "{m:>8} {:>8} {err:>14.6e} {ratio:>8} {dist:>12.6}",
            approx.len()
        )
        .map_err(io_error)?;
        if dist >= radius {
            warnings.push(format!(
                "warning: m = {m}: centers reach distance {dist:.4} >= r = {radius}, outside N_r(0)"
            ));
        }
        previous = Some(err);
    }
    for w in warnings {
        eprintln!("{w}");
    }
    Ok(())
}

pub fn bound(n: u64, degree: u64, shift_degree: u64) -> Result<(), CliError> {
    let value = center_count_bound(n, degree, shift_degree)?;
    println!("{value}");
    Ok(())
}
