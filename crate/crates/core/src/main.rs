use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use heatflux::harness::{
    convergence_study, run_experiment, solve_config, write_reports, write_summary, RunConfig,
    RunOutput, Sweep,
};
use heatflux::mesh::write_vtk;
use heatflux::metrics::{l2_error_sq, ManufacturedProblem};
use heatflux::solver::{write_checkpoint, Checkpoint};

#[derive(Parser)]
#[command(
    name = "heatflux",
    version,
    about = "Heat equation solver with equilibrated-flux error estimators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve and report the nodal L2 error per step.
    Solve(ConfigArgs),
    /// Solve and compute the estimators; writes the reports.
    Estimate(RunArgs),
    /// Estimate and check every bound; exit code 1 on any failure.
    Verify(RunArgs),
    /// Run a convergence or robustness sweep.
    Sweep(SweepArgs),
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Key-value config file; its settings override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// MS1, MS2 or MS3.
    #[arg(long)]
    problem: Option<String>,
    /// Cells per side of the initial mesh.
    #[arg(long)]
    n: Option<usize>,
    /// Space degree `p` or split degrees `a,b` (x < 1/2, x >= 1/2).
    #[arg(long)]
    p: Option<String>,
    /// Time degree.
    #[arg(long)]
    q: Option<usize>,
    /// Number of time steps.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    t_final: Option<f64>,
    /// Mesh changes, e.g. `1:refine,2:coarsen`.
    #[arg(long)]
    schedule: Option<String>,
    /// Extra uniform refinements of the reference space.
    #[arg(long)]
    riesz_refinements: Option<usize>,
    /// Extra polynomial degree of the reference space.
    #[arg(long)]
    riesz_degree: Option<usize>,
    /// riesz or poincare.
    #[arg(long)]
    oscillation: Option<String>,
    /// Extra Gauss points in time.
    #[arg(long)]
    time_points: Option<usize>,
    /// Patch-local lifts (local efficiency, localization).
    #[arg(long)]
    local: Option<bool>,
    /// Repeat the dual norms on an enriched reference space.
    #[arg(long)]
    riesz_audit: Option<bool>,
    /// Output directory for reports.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Also write per-step VTK files of the element indicators.
    #[arg(long)]
    vtk: bool,
}

#[derive(Args, Clone)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// `kind:values` with kind h, tau, p or q, e.g. `h:4,8,16`.
    #[arg(long)]
    sweep: String,
    /// For h sweeps: keep steps proportional to n.
    #[arg(long)]
    couple_time: bool,
}

impl ConfigArgs {
    fn build(&self) -> heatflux::Result<RunConfig> {
        let mut c = RunConfig::default();
        let mut set = |k: &str, v: Option<String>| match v {
            Some(v) => c.set(k, &v),
            None => Ok(()),
        };
        set("problem", self.problem.clone())?;
        set("n", self.n.map(|v| v.to_string()))?;
        set("p", self.p.clone())?;
        set("q", self.q.map(|v| v.to_string()))?;
        set("steps", self.steps.map(|v| v.to_string()))?;
        set("t_final", self.t_final.map(|v| v.to_string()))?;
        set("schedule", self.schedule.clone())?;
        set(
            "riesz_refinements",
            self.riesz_refinements.map(|v| v.to_string()),
        )?;
        set("riesz_degree", self.riesz_degree.map(|v| v.to_string()))?;
        set("oscillation", self.oscillation.clone())?;
        set("time_points", self.time_points.map(|v| v.to_string()))?;
        set("local", self.local.map(|v| v.to_string()))?;
        set("riesz_audit", self.riesz_audit.map(|v| v.to_string()))?;
        if let Some(o) = &self.output {
            c.output = Some(o.clone());
        }
        if let Some(path) = &self.config {
            c.apply_text(&fs::read_to_string(path)?)?;
        }
        c.validate()?;
        Ok(c)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Command) -> heatflux::Result<bool> {
    match cmd {
        Command::Solve(a) => solve(&a.build()?),
        Command::Estimate(a) => {
            let out = experiment(&a, false)?;
            println!(
                "eta_ey {:.6e} eta_y {:.6e} effectivity_ey {:.4} effectivity_y {:.4}",
                out.estimators.eta_ey(),
                out.estimators.eta_y(),
                out.effectivity_ey(),
                out.effectivity_y()
            );
            Ok(out.passed())
        }
        Command::Verify(a) => Ok(experiment(&a, true)?.passed()),
        Command::Sweep(a) => sweep(&a),
    }
}

fn solve(cfg: &RunConfig) -> heatflux::Result<bool> {
    let (_forest, sol) = solve_config(cfg)?;
    let problem = ManufacturedProblem::new(cfg.problem, cfg.t_final);
    let nodes = sol.disc.partition.nodes().to_vec();
    let mut rows = vec!["step,time,dofs,l2_error".to_string()];
    for n in 1..=sol.disc.n_steps() {
        let t = nodes[n];
        let e = l2_error_sq(&sol, n, &sol.end_value(n), |x| problem.u(x, t)).sqrt();
        rows.push(format!("{n},{t:e},{},{e:e}", sol.disc.space(n).n_dofs()));
    }
    for r in &rows {
        println!("{r}");
    }
    if let Some(dir) = &cfg.output {
        fs::create_dir_all(dir)?;
        let mut w = BufWriter::new(File::create(dir.join("solution_steps.csv"))?);
        writeln!(w, "# config_hash = {}", cfg.hash())?;
        for r in &rows {
            writeln!(w, "{r}")?;
        }
        w.flush()?;
        let cp = Checkpoint {
            initial: sol.initial.clone(),
            modes: sol.modes.clone(),
        };
        let mut w = BufWriter::new(File::create(dir.join("solution.txt"))?);
        write_checkpoint(&cp, &mut w)?;
        w.flush()?;
    }
    Ok(true)
}

fn experiment(a: &RunArgs, print_summary: bool) -> heatflux::Result<RunOutput> {
    let cfg = a.config.build()?;
    let out = run_experiment(&cfg)?;
    if print_summary {
        let mut s = Vec::new();
        write_summary(&out, &mut s)?;
        print!("{}", String::from_utf8_lossy(&s));
    }
    eprintln!("finished in {:.2} s", out.seconds);
    if let Some(dir) = &cfg.output {
        write_reports(&out, dir)?;
        if a.vtk {
            write_indicator_vtk(&cfg, &out, dir)?;
        }
    }
    Ok(out)
}

fn write_indicator_vtk(cfg: &RunConfig, out: &RunOutput, dir: &Path) -> heatflux::Result<()> {
    let (_forest, meshes) = heatflux::harness::build_meshes(cfg)?;
    for s in &out.estimators.steps {
        let flux: Vec<f64> = s.elements.iter().map(|e| e.flux_sq).collect();
        let jump: Vec<f64> = s.elements.iter().map(|e| e.jump_sq).collect();
        let osc: Vec<f64> = s.elements.iter().map(|e| e.osc_h_sq).collect();
        let w = BufWriter::new(File::create(
            dir.join(format!("indicators_{:03}.vtk", s.n)),
        )?);
        write_vtk(
            &meshes[s.n],
            &[("flux_sq", &flux), ("jump_sq", &jump), ("osc_h_sq", &osc)],
            &[],
            w,
        )?;
    }
    Ok(())
}

fn sweep(a: &SweepArgs) -> heatflux::Result<bool> {
    let base = a.config.build()?;
    let mut sw = Sweep::parse(&a.sweep)?;
    sw.couple_time = a.couple_time;
    let table = convergence_study(&base, &sw, |out| {
        eprintln!(
            "{} {}: effectivity_y {:.4} effectivity_ey {:.4} ({:.2} s)",
            out.hash,
            if out.passed() { "PASS" } else { "FAIL" },
            out.effectivity_y(),
            out.effectivity_ey(),
            out.seconds
        );
    })?;
    let mut s = Vec::new();
    table.write_csv(&mut s)?;
    print!("{}", String::from_utf8_lossy(&s));
    if let Some(dir) = &base.output {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("study.csv"), &s)?;
    }
    Ok(table.passed())
}
