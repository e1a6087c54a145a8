//! One runner per subcommand. Each resolves its options, computes, and
//! writes outputs through [`Run`].

use std::path::{Path, PathBuf};

use memdomain_core::fock_quantization::{self as fock, FockError, TwoModeState};
use memdomain_core::lifetime_domains::{self as life, CurveTable, Figure, FigureSpec, LifetimeError};
use memdomain_core::memory_codes::{MemoryError, Registry, StimulusSpectrum};
use memdomain_core::oscillator_dynamics::{self as osc, BesselMix, PairState, Trajectory};
use memdomain_core::special_fns::{self, BesselKind};
use memdomain_core::{ModeIndex, SystemParams};
use serde::Serialize;
use serde_json::json;

use crate::cli::*;
use crate::output::{json_bytes, num, ManifestHeader, Run, Table};
use crate::CliError;

/// Everything a run was computed from, echoed into the manifest.
#[derive(Serialize)]
struct Resolved<O> {
    params: ResolvedParams,
    seed: u64,
    no_timestamp: bool,
    options: O,
}

#[derive(Debug, Clone, Copy, Serialize)]
struct ResolvedParams {
    #[serde(rename = "L")]
    damping: f64,
    c: f64,
}

pub struct Context {
    params: SystemParams,
    resolved: ResolvedParams,
    seed: u64,
    no_timestamp: bool,
    run: Run,
}

impl Context {
    pub fn record_input(&mut self, name: String, bytes: &[u8]) {
        self.run.record_input(name, bytes);
    }

    fn finish<O: Serialize>(
        self,
        command: &'static str,
        options: O,
        summary: serde_json::Value,
    ) -> Result<(), CliError> {
        let config = Resolved { params: self.resolved, seed: self.seed, no_timestamp: self.no_timestamp, options };
        self.run.finish(ManifestHeader { command, config, summary }, !self.no_timestamp)?;
        Ok(())
    }
}

fn invalid(key: &str, message: impl Into<String>) -> CliError {
    CliError::Validation { key: key.to_string(), message: message.into() }
}

fn required<T>(value: Option<T>, key: &str, what: &str) -> Result<T, CliError> {
    value.ok_or_else(|| invalid(key, format!("required: {what}")))
}

fn positive(x: f64, key: &str) -> Result<f64, CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(invalid(key, format!("must be finite and > 0, got {x}")))
    }
}

fn non_negative(x: f64, key: &str) -> Result<f64, CliError> {
    if x.is_finite() && x >= 0.0 {
        Ok(x)
    } else {
        Err(invalid(key, format!("must be finite and ≥ 0, got {x}")))
    }
}

fn lifetime_error(e: LifetimeError) -> CliError {
    match e {
        LifetimeError::NeverRecordable { .. } => invalid("mode", format!("{e}; choose ω₀ > L/2")),
        LifetimeError::InvalidSpec(_) | LifetimeError::BadTime(_) => invalid("spec", e.to_string()),
        other => CliError::Compute(other.to_string()),
    }
}

fn memory_error(e: MemoryError) -> CliError {
    match e {
        MemoryError::Lifetime(l) => lifetime_error(l),
        MemoryError::EmptyCode { ref rejected } => {
            CliError::Compute(format!("{e} ({} components below threshold or out of window)", rejected.len()))
        }
        MemoryError::InvalidStimulus(_) => invalid("stimulus", e.to_string()),
        MemoryError::BadTime(_) | MemoryError::NonMonotoneTime { .. } => invalid("t", e.to_string()),
        MemoryError::Schema(_) | MemoryError::Json(_) => invalid("registry", e.to_string()),
        other => CliError::Compute(other.to_string()),
    }
}

fn compute(e: impl std::fmt::Display) -> CliError {
    CliError::Compute(e.to_string())
}

pub fn context(params: ParamsArgs, run: RunArgs) -> Result<Context, CliError> {
    let damping = positive(params.damping.unwrap_or(1.0), "params.L")?;
    let c = positive(params.c.unwrap_or(1.0), "params.c")?;
    let system = SystemParams::new(damping, c).map_err(|e| invalid("params", e.to_string()))?;
    Ok(Context {
        params: system,
        resolved: ResolvedParams { damping, c },
        seed: run.seed.unwrap_or(0),
        no_timestamp: run.no_timestamp.unwrap_or(false),
        run: Run::default(),
    })
}

/// Momentum from `k` or `ω₀/c`; both may be given if they agree.
fn momentum(params: &SystemParams, k: Option<f64>, omega0: Option<f64>, key: &str) -> Result<f64, CliError> {
    match (k, omega0) {
        (Some(k), None) => positive(k, &format!("{key}.k")),
        (None, Some(w)) => Ok(params.momentum_for(positive(w, &format!("{key}.omega0"))?)),
        (Some(k), Some(w)) => {
            let from_w = params.momentum_for(positive(w, &format!("{key}.omega0"))?);
            if (positive(k, &format!("{key}.k"))? - from_w).abs() <= 1e-12 * from_w {
                Ok(k)
            } else {
                Err(invalid(&format!("{key}.k"), format!("k = {k} disagrees with omega0/c = {from_w}")))
            }
        }
        (None, None) => Err(invalid(&format!("{key}.omega0"), "required: reference frequency (or k)")),
    }
}

fn mode(k: f64, n: u32) -> Result<ModeIndex, CliError> {
    ModeIndex::new(k, n).map_err(|e| invalid("k", e.to_string()))
}

#[derive(Serialize)]
struct BesselOptions {
    kind: KindArg,
    order: u32,
    z: Vec<f64>,
    out: Option<PathBuf>,
}

pub fn bessel(mut ctx: Context, args: BesselArgs) -> Result<(), CliError> {
    let kind = required(args.kind, "bessel.kind", "j or y")?;
    let order = required(args.order, "bessel.order", "integer n ≥ 0")?;
    if args.z.is_empty() {
        return Err(invalid("bessel.z", "required: one or more arguments z ≥ 0"));
    }
    let family = match kind {
        KindArg::J => BesselKind::FirstKind,
        KindArg::Y => BesselKind::SecondKind,
    };
    let mut values = Vec::with_capacity(args.z.len());
    for &z in &args.z {
        non_negative(z, "bessel.z")?;
        let v = special_fns::sph(family, order, z).map_err(|e| invalid("bessel.z", e.to_string()))?;
        println!("{}", num(v));
        values.push(v);
    }
    if let Some(out) = &args.out {
        let mut table = Table::new(&["z", "value"]);
        for (z, v) in args.z.iter().zip(&values) {
            table.row([num(*z), num(*v)]);
        }
        ctx.run.write(out, &table.into_bytes())?;
    }
    let options = BesselOptions { kind, order, z: args.z, out: args.out };
    ctx.finish("bessel", options, json!({ "values": values.len() }))
}

#[derive(Serialize)]
struct EvolveOptions {
    k: f64,
    omega0: f64,
    n: u32,
    t_max: f64,
    method: MethodArg,
    points: usize,
    a: f64,
    b: f64,
    rel_tol: f64,
    out: PathBuf,
}

fn trajectory_csv(params: &SystemParams, m: &ModeIndex, traj: &Trajectory) -> Result<Vec<u8>, CliError> {
    let mut table = Table::new(&["t", "u", "v", "r", "omega", "Omega"]);
    for i in 0..traj.len() {
        let t = traj.times[i];
        let omega = osc::omega_mode(params, m, t).map_err(compute)?;
        let common = if life::mode_alive(params, m, t) {
            osc::common_frequency(params, m, t).unwrap_or(f64::NAN)
        } else {
            f64::NAN
        };
        table.row([t, traj.u[i], traj.v[i], traj.r[i], omega, common].map(num));
    }
    Ok(table.into_bytes())
}

fn sibling(path: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}.{ext}"))
}

pub fn evolve(mut ctx: Context, args: EvolveArgs) -> Result<(), CliError> {
    let p = ctx.params;
    let k = momentum(&p, args.k, args.omega0, "evolve")?;
    let n = required(args.n, "evolve.n", "integer openness order n ≥ 0")?;
    let m = mode(k, n)?;
    let window = life::recording_window(&p, &m).map_err(lifetime_error)?;
    let t_max = match args.t_max {
        Some(t) => positive(t, "evolve.t_max")?,
        None if window > 0.0 => window,
        None => return Err(invalid("evolve.t_max", "recording window is empty; give t_max > 0")),
    };
    let points = args.points.unwrap_or(1001);
    if points < 2 {
        return Err(invalid("evolve.points", format!("must be ≥ 2, got {points}")));
    }
    let (a, b) = match (args.a, args.b) {
        (None, None) => {
            let d = BesselMix::default();
            (d.a, d.b)
        }
        (a, b) => (a.unwrap_or(0.0), b.unwrap_or(0.0)),
    };
    let mix = BesselMix::new(a, b).map_err(|e| invalid("evolve.a", e.to_string()))?;
    let rel_tol = args.rel_tol.unwrap_or(1e-10);
    if !(rel_tol.is_finite() && rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(invalid("evolve.rel_tol", format!("must lie in (0, 1), got {rel_tol}")));
    }
    let method = args.method.unwrap_or(MethodArg::Closed);
    let out = required(args.out, "evolve.out", "output CSV path")?;

    let grid = osc::uniform_grid(t_max, points - 1);
    let closed = match method {
        MethodArg::Closed | MethodArg::Both => Some(osc::closed_form_trajectory(&p, &m, &mix, &grid).map_err(compute)?),
        MethodArg::Ode => None,
    };
    let ode = match method {
        MethodArg::Ode | MethodArg::Both => {
            let init = PairState::matching_closed_form(&p, &m, &mix, 0.0).map_err(compute)?;
            Some(osc::integrate_pair(&p, &m, &init, &grid, rel_tol).map_err(compute)?)
        }
        MethodArg::Closed => None,
    };

    let mut summary = json!({ "window": window, "samples": points });
    match (&closed, &ode) {
        (Some(c), Some(o)) => {
            ctx.run.write(&out, &trajectory_csv(&p, &m, c)?)?;
            ctx.run.write(&sibling(&out, "_ode", "csv"), &trajectory_csv(&p, &m, o)?)?;
            let dev = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            summary["max_abs_deviation_u"] = json!(dev(&c.u, &o.u));
            summary["max_abs_deviation_v"] = json!(dev(&c.v, &o.v));
        }
        (Some(t), None) | (None, Some(t)) => ctx.run.write(&out, &trajectory_csv(&p, &m, t)?)?,
        (None, None) => unreachable!("method selects at least one trajectory"),
    }
    let options = EvolveOptions { k, omega0: p.omega0(k), n, t_max, method, points, a, b, rel_tol, out };
    ctx.finish("evolve", options, summary)
}

fn curve_csv(table: &CurveTable) -> Vec<u8> {
    let mut csv = Table::new(&["curve_id", "t", "lambda"]);
    for row in &table.rows {
        csv.row([row.curve_id.clone(), num(row.t), num(row.lambda)]);
    }
    csv.into_bytes()
}

fn sidecar(params: ResolvedParams, table: &CurveTable) -> Vec<u8> {
    json_bytes(&json!({
        "figure_spec": table.spec,
        "params": params,
        "lifetime_scale": 1.0,
        "curves": table.curves,
    }))
}

fn sampling(ceiling: Option<f64>, points: Option<usize>, key: &str) -> Result<(f64, usize), CliError> {
    let ceiling = positive(ceiling.unwrap_or(life::DEFAULT_CEILING), &format!("{key}.ceiling"))?;
    let points = points.unwrap_or(life::DEFAULT_POINTS);
    if points < 2 {
        return Err(invalid(&format!("{key}.points"), format!("must be ≥ 2, got {points}")));
    }
    Ok((ceiling, points))
}

#[derive(Serialize)]
struct LifetimesOptions {
    modes: Vec<(f64, u32)>,
    ceiling: f64,
    points: usize,
    out: PathBuf,
}

pub fn lifetimes(mut ctx: Context, args: LifetimesArgs) -> Result<(), CliError> {
    let p = ctx.params;
    let ks: Vec<f64> = match (args.k.is_empty(), args.omega0.is_empty()) {
        (true, true) => return Err(invalid("lifetimes.omega0", "required: one or more frequencies (or k)")),
        (false, true) => args.k.iter().map(|&k| momentum(&p, Some(k), None, "lifetimes")).collect::<Result<_, _>>()?,
        (true, false) => {
            args.omega0.iter().map(|&w| momentum(&p, None, Some(w), "lifetimes")).collect::<Result<_, _>>()?
        }
        (false, false) => {
            if args.k.len() != args.omega0.len() {
                return Err(invalid("lifetimes.k", "k and omega0 lists must have equal length"));
            }
            args.k
                .iter()
                .zip(&args.omega0)
                .map(|(&k, &w)| momentum(&p, Some(k), Some(w), "lifetimes"))
                .collect::<Result<_, _>>()?
        }
    };
    if args.n.is_empty() {
        return Err(invalid("lifetimes.n", "required: one or more orders n ≥ 0"));
    }
    let (ceiling, points) = sampling(args.ceiling, args.points, "lifetimes")?;
    let out = required(args.out, "lifetimes.out", "output CSV path")?;
    let modes: Vec<(f64, u32)> = ks.iter().flat_map(|&k| args.n.iter().map(move |&n| (k, n))).collect();
    for &(k, n) in &modes {
        life::recording_window(&p, &mode(k, n)?).map_err(lifetime_error)?;
    }
    let spec = FigureSpec { figure: Figure::Custom, modes: modes.clone(), ceiling, points };
    let table = life::curve_table(&p, &spec).map_err(lifetime_error)?;
    ctx.run.write(&out, &curve_csv(&table))?;
    ctx.run.write(&sibling(&out, "", "json"), &sidecar(ctx.resolved, &table))?;
    let summary = json!({ "curves": table.curves });
    ctx.finish("lifetimes", LifetimesOptions { modes, ceiling, points, out }, summary)
}

#[derive(Serialize)]
struct FiguresOptions {
    which: Vec<Figure>,
    ceiling: f64,
    points: usize,
    out: PathBuf,
}

pub fn figures(mut ctx: Context, args: FiguresArgs) -> Result<(), CliError> {
    let which_text = args.which.unwrap_or_else(|| "all".to_string());
    let which: Vec<Figure> = match which_text.as_str() {
        "all" => vec![Figure::Fig1, Figure::Fig2, Figure::Fig3, Figure::Fig4],
        name => match name.parse::<Figure>() {
            Ok(Figure::Custom) | Err(_) => {
                return Err(invalid("figures.which", format!("expected fig1, fig2, fig3, fig4 or all, got {name:?}")))
            }
            Ok(f) => vec![f],
        },
    };
    let (ceiling, points) = sampling(args.ceiling, args.points, "figures")?;
    let out = required(args.out, "figures.out", "output directory")?;
    let mut summary = serde_json::Map::new();
    for &figure in &which {
        let spec = FigureSpec { ceiling, points, ..FigureSpec::default_for(figure) };
        let table = life::curve_table(&ctx.params, &spec).map_err(lifetime_error)?;
        ctx.run.write(&out.join(format!("{}.csv", figure.name())), &curve_csv(&table))?;
        ctx.run.write(&out.join(format!("{}.json", figure.name())), &sidecar(ctx.resolved, &table))?;
        summary.insert(figure.name().to_string(), json!(table.curves));
    }
    ctx.finish("figures", FiguresOptions { which, ceiling, points, out }, summary.into())
}

#[derive(Serialize)]
struct SqueezeOptions {
    gamma: f64,
    t: f64,
    cutoff: usize,
    oracle: bool,
    out: PathBuf,
}

#[derive(Serialize)]
struct SqueezeReport<'a> {
    gamma: f64,
    t: f64,
    gamma_t: f64,
    cutoff: usize,
    #[serde(rename = "nA")]
    n_a: f64,
    #[serde(rename = "nTilde")]
    n_tilde: f64,
    normalization: f64,
    truncated_weight: f64,
    /// `c_m` of `|m, m⟩` as `[re, im]`.
    coefficients: &'a [num_complex::Complex64],
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleReport>,
}

#[derive(Serialize)]
struct OracleReport {
    cutoff: usize,
    max_deviation: f64,
}

pub fn squeeze(mut ctx: Context, args: SqueezeArgs) -> Result<(), CliError> {
    let gamma = args.gamma.unwrap_or(ctx.params.gamma());
    if !gamma.is_finite() {
        return Err(invalid("squeeze.gamma", format!("must be finite, got {gamma}")));
    }
    let t = required(args.t, "squeeze.t", "evolution time")?;
    if !t.is_finite() {
        return Err(invalid("squeeze.t", format!("must be finite, got {t}")));
    }
    let gt = gamma * t;
    let chosen = args.cutoff.is_some();
    let cutoff = args.cutoff.unwrap_or_else(|| fock::default_cutoff(gt));
    if cutoff < fock::MIN_CUTOFF {
        return Err(invalid("squeeze.cutoff", format!("must be ≥ {}, got {cutoff}", fock::MIN_CUTOFF)));
    }
    let state = fock::squeezed_vacuum(gamma, t, cutoff).map_err(|e| match e {
        FockError::CutoffTooSmall { .. } if chosen => invalid("squeeze.cutoff", e.to_string()),
        other => compute(other),
    })?;
    let oracle_on = args.oracle.unwrap_or(false);
    let oracle = if oracle_on {
        let big = fock::cutoff_for_tail(gt, 18.0).max(48).max(cutoff);
        let evolved = fock::brute_force_evolve(&fock::pair_hamiltonian(gamma, big), t, &TwoModeState::vacuum(big))
            .map_err(compute)?;
        let max_deviation = state.coeffs.iter().zip(&evolved.coeffs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        Some(OracleReport { cutoff: big, max_deviation })
    } else {
        None
    };
    let (n_a, n_tilde) = fock::expected_pair_number(&state);
    let report = SqueezeReport {
        gamma,
        t,
        gamma_t: gt,
        cutoff,
        n_a,
        n_tilde,
        normalization: state.norm_sqr(),
        truncated_weight: fock::squeeze_tail(gt, cutoff),
        coefficients: &state.coeffs,
        oracle,
    };
    let out = required(args.out, "squeeze.out", "output JSON path")?;
    ctx.run.write(&out, &json_bytes(&report))?;
    let summary = json!({ "nA": n_a, "normalization": report.normalization });
    ctx.finish("squeeze", SqueezeOptions { gamma, t, cutoff, oracle: oracle_on, out }, summary)
}

fn load_registry(run: &mut Run, path: &Path, create: bool) -> Result<Registry, CliError> {
    if create && !path.exists() {
        return Ok(Registry::new());
    }
    let bytes = run.read_input("registry", path)?;
    let text = String::from_utf8(bytes).map_err(|e| invalid("registry", e.to_string()))?;
    Registry::from_json(&text).map_err(memory_error)
}

fn load_spectrum(run: &mut Run, key: &str, path: &Path) -> Result<StimulusSpectrum, CliError> {
    let bytes = run.read_input(key, path)?;
    let spectrum: StimulusSpectrum =
        serde_json::from_slice(&bytes).map_err(|e| invalid(key, format!("{}: {e}", path.display())))?;
    spectrum.validate().map_err(|e| invalid(key, e.to_string()))?;
    Ok(spectrum)
}

fn report<T: Serialize>(run: &mut Run, out: Option<&PathBuf>, value: &T) -> Result<(), CliError> {
    let bytes = json_bytes(value);
    print!("{}", String::from_utf8_lossy(&bytes));
    if let Some(out) = out {
        run.write(out, &bytes)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct RecordOptions {
    registry: PathBuf,
    spectrum: PathBuf,
    t: f64,
    out: Option<PathBuf>,
}

pub fn record(mut ctx: Context, args: RecordArgs) -> Result<(), CliError> {
    let registry_path = required(args.registry, "record.registry", "registry JSON path (created if missing)")?;
    let spectrum_path = required(args.spectrum, "record.spectrum", "stimulus spectrum JSON path")?;
    let t = non_negative(required(args.t, "record.t", "recording time")?, "record.t")?;
    let mut registry = load_registry(&mut ctx.run, &registry_path, true)?;
    let spectrum = load_spectrum(&mut ctx.run, "record.spectrum", &spectrum_path)?;
    let recorded = registry.record(&spectrum, t, &ctx.params).map_err(memory_error)?;
    ctx.run.write(&registry_path, registry.to_json().as_bytes())?;
    report(&mut ctx.run, args.out.as_ref(), &recorded)?;
    let summary = json!({ "code_id": recorded.code.id, "rejected": recorded.rejected.len() });
    let options = RecordOptions { registry: registry_path, spectrum: spectrum_path, t, out: args.out };
    ctx.finish("record", options, summary)
}

#[derive(Serialize)]
struct RecallOptions {
    registry: PathBuf,
    signal: PathBuf,
    energy: f64,
    t: f64,
    out: PathBuf,
}

pub fn recall(mut ctx: Context, args: RecallArgs) -> Result<(), CliError> {
    let registry_path = required(args.registry, "recall.registry", "registry JSON path")?;
    let signal_path = required(args.signal, "recall.signal", "signal spectrum JSON path")?;
    let energy = non_negative(required(args.energy, "recall.energy", "replication-signal energy")?, "recall.energy")?;
    let t = non_negative(required(args.t, "recall.t", "recall time")?, "recall.t")?;
    let out = args.out.unwrap_or_else(|| registry_path.with_file_name("recall.json"));
    let registry = load_registry(&mut ctx.run, &registry_path, false)?;
    let signal = load_spectrum(&mut ctx.run, "recall.signal", &signal_path)?;
    let result = registry.recall(&signal, energy, t, &ctx.params).map_err(memory_error)?;
    report(&mut ctx.run, Some(&out), &result)?;
    let summary = json!({ "outcome": result.outcome, "matched": result.matched, "score": result.score });
    ctx.finish("recall", RecallOptions { registry: registry_path, signal: signal_path, energy, t, out }, summary)
}

#[derive(Serialize)]
struct ForgetOptions {
    registry: PathBuf,
    t: f64,
    out: Option<PathBuf>,
}

pub fn forget_sweep(mut ctx: Context, args: ForgetArgs) -> Result<(), CliError> {
    let registry_path = required(args.registry, "forget-sweep.registry", "registry JSON path")?;
    let t = non_negative(required(args.t, "forget-sweep.t", "sweep time")?, "forget-sweep.t")?;
    let mut registry = load_registry(&mut ctx.run, &registry_path, false)?;
    let decay = registry.decay_codes(t, &ctx.params).map_err(memory_error)?;
    ctx.run.write(&registry_path, registry.to_json().as_bytes())?;
    report(&mut ctx.run, args.out.as_ref(), &decay)?;
    let summary = json!({ "degraded": decay.degraded.len(), "forgotten": decay.forgotten.len() });
    ctx.finish("forget-sweep", ForgetOptions { registry: registry_path, t, out: args.out }, summary)
}
