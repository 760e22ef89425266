use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ensemble_su2::analysis::{
    convergence_sweep, default_omega_grid, euler_composite, uniformity, verify_certificates,
    CertificateOptions, CertificateSuite,
};
use ensemble_su2::fourier::QuadratureRule;
use ensemble_su2::schedule::euler_compose;
use ensemble_su2::simulator::{ensemble_propagate, fmt17};
use ensemble_su2::{Axis, BumpParams, ControlSchedule, SimConfig, TargetProfile};

use crate::manifest::{self, Clock};
use crate::plot::{self, Panel, Series};
use crate::{
    Command, EulerArgs, Failure, OmegaArgs, SimulateArgs, SweepArgs, SynthesizeArgs, VerifyArgs,
};

const DRIFT_LIMIT: f64 = 1e-8;

pub fn run(cmd: Command, threads: usize) -> Result<(), Failure> {
    let clock = Clock::start();
    let out = match &cmd {
        Command::Synthesize(a) => synthesize(a)?,
        Command::Simulate(a) => simulate(a)?,
        Command::Sweep(a) => sweep(a)?,
        Command::VerifyLemmas(a) => verify(a)?,
        Command::Euler(a) => euler(a)?,
        Command::Replay(a) => {
            let m = manifest::read(&a.manifest)?;
            if matches!(m.command, Command::Replay(_)) {
                return Err(Failure::usage("manifest records a replay"));
            }
            return run(m.command, threads);
        }
    };
    if let Some(path) = &out.manifest {
        manifest::write(
            path,
            &clock.manifest(&cmd, out.inputs, out.outputs, threads),
        )?;
    }
    out.verdict
}

/// Files touched by a command plus a verdict that is reported only after
/// the manifest has been written.
struct Outcome {
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    manifest: Option<PathBuf>,
    verdict: Result<(), Failure>,
}

impl Outcome {
    fn ok(inputs: Vec<PathBuf>, outputs: Vec<PathBuf>, manifest: Option<PathBuf>) -> Self {
        Self {
            inputs,
            outputs,
            manifest,
            verdict: Ok(()),
        }
    }
}

fn read_text(path: &Path, flag: &str) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("--{flag} {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::usage(format!("{}: {e}", path.display()))
}

fn load_profile(path: &Path) -> Result<TargetProfile, Failure> {
    TargetProfile::from_json(&read_text(path, "profile")?)
        .map_err(|e| Failure::usage(format!("--profile {}: {e}", path.display())))
}

fn parse_axis(s: &str) -> Result<Axis, Failure> {
    s.parse::<Axis>()
        .map_err(|_| Failure::usage(format!("--axis: expected x or y, got {s:?}")))
}

fn check_eps1(eps1: f64) -> Result<(), Failure> {
    if eps1.is_finite() && eps1 > 0.0 {
        Ok(())
    } else {
        Err(Failure::usage(format!(
            "--eps1 must be positive, got {eps1}"
        )))
    }
}

fn check_n(n: u32) -> Result<(), Failure> {
    if n >= 1 {
        Ok(())
    } else {
        Err(Failure::usage("--N must be at least 1"))
    }
}

fn check_dt(dt: Option<f64>) -> Result<(), Failure> {
    match dt {
        Some(d) if !(d.is_finite() && d > 0.0) => {
            Err(Failure::usage(format!("--dt must be positive, got {d}")))
        }
        _ => Ok(()),
    }
}

/// `lo:hi:count`, endpoints included.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::usage(format!("--omega-grid: expected lo:hi:count, got {text:?}"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if count == 0 || !lo.is_finite() || !hi.is_finite() {
        return Err(bad());
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..count)
        .map(|k| {
            if k + 1 == count {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (count - 1) as f64
            }
        })
        .collect())
}

fn omega_list(args: &OmegaArgs, bump: &BumpParams) -> Result<Vec<f64>, Failure> {
    let grid = match (&args.omega, &args.omega_grid) {
        (Some(v), _) => v.clone(),
        (None, Some(spec)) => parse_grid(spec)?,
        (None, None) => default_omega_grid(bump),
    };
    if grid.is_empty() || grid.iter().any(|w| !w.is_finite()) {
        return Err(Failure::usage("--omega: need at least one finite value"));
    }
    Ok(grid)
}

fn synthesize(a: &SynthesizeArgs) -> Result<Outcome, Failure> {
    check_eps1(a.eps1)?;
    check_n(a.n)?;
    let axis = parse_axis(&a.axis)?;
    let profile = load_profile(&a.profile)?;
    let sched = ControlSchedule::build(profile, a.eps1, a.n, axis)?;
    write_text(&a.out, &sched.to_json())?;
    println!(
        "{}: {} segments, duration {}, axis {}",
        a.out.display(),
        sched.segments().len(),
        sched.total_duration(),
        axis.as_str()
    );
    Ok(Outcome::ok(
        vec![a.profile.clone()],
        vec![a.out.clone()],
        Some(manifest::path_for(&a.out)),
    ))
}

fn simulate(a: &SimulateArgs) -> Result<Outcome, Failure> {
    check_dt(a.dt)?;
    if a.stride == 0 {
        return Err(Failure::usage("--stride must be at least 1"));
    }
    let sched = ControlSchedule::from_json(&read_text(&a.schedule, "schedule")?)
        .map_err(|e| Failure::usage(format!("--schedule {}: {e}", a.schedule.display())))?;
    let kernel = sched.kernel()?;
    let omegas = omega_list(&a.omegas, sched.profile().bump())?;
    let dt = a.dt.unwrap_or_else(|| SimConfig::default_dt(&sched));
    let cfg = SimConfig::new(omegas, dt, a.stride)?;
    let result = ensemble_propagate(&sched, &kernel, &cfg)?;

    let drift = result.max_unitarity_defect();
    if drift.is_nan() || drift > DRIFT_LIMIT {
        return Err(Failure::numerical(format!(
            "integrator failure: unitarity defect {drift:e} exceeds {DRIFT_LIMIT:e}"
        )));
    }

    let mut w = create(&a.out)?;
    result
        .write_csv(sched.profile(), &mut w)
        .map_err(io_err(&a.out))?;
    w.flush().map_err(io_err(&a.out))?;

    println!("omega  frob_err  infidelity  P(T)  P_ref(T)");
    for (f, p) in result.finals.iter().zip(&result.populations) {
        println!(
            "{:.6}  {:.4e}  {:.4e}  {:.6}  {:.6}",
            f.omega,
            f.frob_err,
            f.infidelity,
            p.p.last().copied().unwrap_or(f64::NAN),
            p.p_ref.last().copied().unwrap_or(f64::NAN)
        );
    }

    let mut outputs = vec![a.out.clone()];
    if let Some(svg) = &a.plot {
        let mut panels: Vec<Panel> = result
            .frames
            .iter()
            .zip(&result.populations)
            .map(|(fr, p)| Panel {
                title: format!("ω = {}", fr.omega),
                xlabel: "t".into(),
                ylabel: "population".into(),
                series: vec![
                    Series {
                        label: "P".into(),
                        xs: fr.times.clone(),
                        ys: p.p.clone(),
                        dashed: false,
                    },
                    Series {
                        label: "P_ref".into(),
                        xs: fr.times.clone(),
                        ys: p.p_ref.clone(),
                        dashed: true,
                    },
                ],
            })
            .collect();
        panels.push(Panel {
            title: "final infidelity".into(),
            xlabel: "ω".into(),
            ylabel: "1 − |tr(X†U)|/2".into(),
            series: vec![Series {
                label: "infidelity".into(),
                xs: result.finals.iter().map(|f| f.omega).collect(),
                ys: result.finals.iter().map(|f| f.infidelity).collect(),
                dashed: false,
            }],
        });
        write_text(svg, &plot::render(&panels))?;
        outputs.push(svg.clone());
    }
    Ok(Outcome::ok(
        vec![a.schedule.clone()],
        outputs,
        Some(manifest::path_for(&a.out)),
    ))
}

fn sweep(a: &SweepArgs) -> Result<Outcome, Failure> {
    if a.eps1.is_empty() || a.n.is_empty() {
        return Err(Failure::usage("--eps1 and --N need at least one value"));
    }
    for &e in &a.eps1 {
        check_eps1(e)?;
    }
    for &n in &a.n {
        check_n(n)?;
    }
    check_dt(a.dt)?;
    let axis = parse_axis(&a.axis)?;
    let profile = load_profile(&a.profile)?;
    let omegas = omega_list(&a.omegas, profile.bump())?;
    let report = convergence_sweep(&profile, &a.eps1, &a.n, &omegas, axis, a.dt)?;
    write_text(&a.out, &report.to_csv())?;
    println!("eps1  N  max_frob_err  max_infidelity  runtime_s");
    for r in &report.rows {
        println!(
            "{}  {}  {:.4e}  {:.4e}  {:.3}",
            r.eps1, r.n, r.max_frob_err, r.max_infidelity, r.runtime_s
        );
    }
    for &e in &a.eps1 {
        if let Some(p) = report.n_order(e) {
            println!("eps1 = {e}: empirical order in 1/N = {p:.3}");
        }
    }
    Ok(Outcome::ok(
        vec![a.profile.clone()],
        vec![a.out.clone()],
        Some(manifest::path_for(&a.out)),
    ))
}

fn status(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn print_suite(s: &CertificateSuite) {
    if let Some(d) = &s.decay {
        println!(
            "[{}] 1 decay of ĝ on t ∈ [{}, {}]",
            status(d.all_bounded()),
            d.t_min,
            d.t_max
        );
        for r in &d.rows {
            println!("      n={}  C_n={:.4e}  bounded={}", r.n, r.c_n, r.bounded);
        }
    }
    if let Some(t) = &s.truncation {
        let slope = t.slope.map_or("n/a".into(), |p| format!("{p:.3}"));
        println!(
            "[{}] 2 truncated inverse at ω = {}: slope {slope} (> {})",
            status(t.passed),
            t.omega,
            t.threshold
        );
        for (e, v) in &t.rows {
            println!("      eps1={e}  error={v:.4e}");
        }
    }
    if let Some(o) = &s.odd {
        println!(
            "[{}] 3 odd part: max |∫| = {:.3e} over {} samples (≤ {:e})",
            status(o.passed),
            o.max_abs,
            o.samples.len(),
            o.threshold
        );
    }
    if let Some(a) = &s.auxiliary {
        let order = a.order.map_or("n/a".into(), |p| format!("{p:.3}"));
        println!(
            "[{}] 4 ε2 order at eps1 = {}: {order} (≥ {})",
            status(a.passed),
            a.eps1,
            a.threshold
        );
        for r in &a.rows {
            println!("      eps2={}  max_error={:.4e}", r.eps2, r.max_error);
        }
    }
    if let Some(f) = &s.frame {
        let worst = f
            .checks
            .iter()
            .map(|c| c.distance / c.bound)
            .fold(0.0, f64::max);
        println!(
            "[{}] 5 lab frame vs auxiliary: worst distance/bound = {worst:.3e} over {} tuples",
            status(f.passed),
            f.checks.len()
        );
    }
}

fn verify(a: &VerifyArgs) -> Result<Outcome, Failure> {
    check_dt(a.dt)?;
    let profile = load_profile(&a.profile)?;
    let mut opts = CertificateOptions::default();
    if a.coarse {
        opts.rule = QuadratureRule::coarse();
    }
    if let Some(e) = &a.eps2 {
        if e.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Failure::usage("--eps2 values must be non-negative"));
        }
        opts.scaling_eps2 = e.clone();
    }
    if let Some(e) = a.eps1 {
        check_eps1(e)?;
        opts.scaling_eps1 = e;
    }
    if let Some(dt) = a.dt {
        opts.dt = dt;
    }
    if let Some(l) = &a.lemma {
        if let Some(bad) = l.iter().find(|k| !(1..=5).contains(*k)) {
            return Err(Failure::usage(format!(
                "--lemma: expected values in 1..=5, got {bad}"
            )));
        }
    }
    let suite = verify_certificates(&profile, &opts, a.lemma.as_deref())?;
    print_suite(&suite);

    let mut outputs = Vec::new();
    if let Some(out) = &a.out {
        let json = serde_json::to_string_pretty(&suite).expect("report serializes");
        write_text(out, &(json + "\n"))?;
        outputs.push(out.clone());
    }
    Ok(Outcome {
        inputs: vec![a.profile.clone()],
        manifest: a.out.as_deref().map(manifest::path_for),
        outputs,
        verdict: if suite.all_passed() {
            Ok(())
        } else {
            Err(Failure::verification("one or more checks failed"))
        },
    })
}

fn euler(a: &EulerArgs) -> Result<Outcome, Failure> {
    check_eps1(a.eps1)?;
    check_n(a.n)?;
    check_dt(a.dt)?;
    if a.bump.len() != 4 {
        return Err(Failure::usage("--bump: expected a,b,c,d"));
    }
    let bump = BumpParams::new(a.bump[0], a.bump[1], a.bump[2], a.bump[3])
        .map_err(|e| Failure::usage(format!("--bump: {e}")))?;
    let prof = |flag: &str, src: &str| {
        TargetProfile::new(bump, src).map_err(|e| Failure::usage(format!("--{flag}: {e}")))
    };
    let (alpha, beta, gamma) = (
        prof("alpha", &a.alpha)?,
        prof("beta", &a.beta)?,
        prof("gamma", &a.gamma)?,
    );
    let schedules = euler_compose(&alpha, &beta, &gamma, a.eps1, a.n)?;
    let omegas = omega_list(&a.omegas, &bump)?;
    let rows = euler_composite(&schedules, &omegas, a.dt)?;

    fs::create_dir_all(&a.out_dir).map_err(io_err(&a.out_dir))?;
    let names = [
        "schedule_1_gamma_x.json",
        "schedule_2_beta_y.json",
        "schedule_3_alpha_x.json",
    ];
    let mut outputs = Vec::new();
    for (s, name) in schedules.iter().zip(names) {
        let p = a.out_dir.join(name);
        write_text(&p, &s.to_json())?;
        outputs.push(p);
    }
    let csv_path = a.out_dir.join("composite.csv");
    let mut w = create(&csv_path)?;
    let e = io_err(&csv_path);
    writeln!(w, "omega,re00,im00,re01,im01,re10,im10,re11,im11,frob_err,infidelity,err_gamma,err_beta,err_alpha,product_gap").map_err(&e)?;
    for r in &rows {
        let m = &r.composite.m;
        let cols = [
            r.omega,
            m[0][0].re,
            m[0][0].im,
            m[0][1].re,
            m[0][1].im,
            m[1][0].re,
            m[1][0].im,
            m[1][1].re,
            m[1][1].im,
            r.frob_err,
            r.infidelity,
            r.single_errs[0],
            r.single_errs[1],
            r.single_errs[2],
            r.product_gap,
        ];
        let line: Vec<String> = cols.iter().map(|v| fmt17(*v)).collect();
        writeln!(w, "{}", line.join(",")).map_err(&e)?;
    }
    w.flush().map_err(&e)?;
    drop(e);
    outputs.push(csv_path);

    let errs: Vec<f64> = rows.iter().map(|r| r.frob_err).collect();
    let u = uniformity(&errs);
    println!(
        "composite error vs exp(−iασx)exp(−iβσy)exp(−iγσx): max {:.4e}, median {:.4e}",
        u.max, u.median
    );
    let worst_bound = rows
        .iter()
        .map(|r| r.frob_err - r.single_errs.iter().sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    println!("max(composite − Σ single errors) = {worst_bound:.3e}");
    Ok(Outcome::ok(
        vec![],
        outputs,
        Some(a.out_dir.join("manifest.json")),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g = parse_grid("0.5:1:33").unwrap();
        assert_eq!(g.len(), 33);
        assert_eq!(g[0], 0.5);
        assert_eq!(g[32], 1.0);
        assert!((g[16] - 0.75).abs() < 1e-15);
        assert_eq!(parse_grid("0.7:0.9:1").unwrap(), vec![0.7]);
        assert!(parse_grid("0.5:1").is_err());
        assert!(parse_grid("0.5:1:0").is_err());
        assert!(parse_grid("a:1:3").is_err());
    }
}
