//! Command-line interface.

use crate::checks::{run_suite, Faults, Suite};
use crate::config::{parse_config, Format, PartialConfig, RunConfig};
use crate::report::{write_report, write_rows, Row, Summary};
use clap::{Args, Parser, Subcommand, ValueEnum};
use kerrteuk::geometry::{self, ChartPoint};
use kerrteuk::radial::{self, Bc, ModeSpec};
use kerrteuk::tetrad::{self, closed, Scaling};
use kerrteuk::{angular, tsid, unruh, C64};
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "kerrteuk", version, about = "Teukolsky fields on subextreme Kerr")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Configuration overrides shared by every subcommand.
#[derive(Args, Debug, Default)]
pub struct GlobalArgs {
    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Black-hole mass M.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub mass: Option<f64>,
    /// Spin parameter a, |a| < M.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Spin weights for grid sweeps, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub spins: Option<Vec<i32>>,
    /// Frequencies for grid sweeps, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub omegas: Option<Vec<f64>>,
    /// Largest |m| in grid sweeps.
    #[arg(long, global = true)]
    pub m_max: Option<i32>,
    /// Largest ℓ in grid sweeps.
    #[arg(long, global = true)]
    pub ell_max: Option<i32>,
    /// Tolerance for identities checked at 1e-8 by default.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Directory for verification reports.
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seed for every random sample drawn by `verify`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

impl GlobalArgs {
    fn partial(&self) -> PartialConfig {
        PartialConfig {
            mass: self.mass,
            a: self.a,
            spins: self.spins.clone(),
            omegas: self.omegas.clone(),
            m_max: self.m_max,
            ell_max: self.ell_max,
            tolerance: self.tolerance,
            output_dir: self.output_dir.clone(),
            format: self.format,
            seed: self.seed,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Horizon data, tortoise coordinates and metric at a Boyer–Lindquist point.
    Geometry {
        #[command(subcommand)]
        action: GeometryCmd,
    },
    /// Frame normalisation and the Teukolsky potential at a point.
    Tetrad {
        #[command(subcommand)]
        action: TetradCmd,
    },
    /// Spheroidal harmonics and Teukolsky–Starobinsky constants.
    Angular {
        #[command(subcommand)]
        action: AngularCmd,
    },
    /// Radial mode solutions.
    Radial {
        #[command(subcommand)]
        action: RadialCmd,
    },
    /// Teukolsky–Starobinsky identities for one mode.
    Ts {
        #[command(subcommand)]
        action: TsCmd,
    },
    /// Thermal kernels of the Unruh state.
    Unruh {
        #[command(subcommand)]
        action: UnruhCmd,
    },
    /// Run a verification suite and write its report.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<Fault>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    GammaSign,
}

#[derive(Subcommand, Debug)]
pub enum GeometryCmd {
    /// Evaluate at (r, θ).
    Eval {
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
        theta: f64,
    },
}

#[derive(Subcommand, Debug)]
pub enum TetradCmd {
    /// Compare numerical Γ contractions with their closed forms.
    Check {
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
    },
}

#[derive(Args, Debug, Clone, Copy)]
pub struct ModeArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub s: i32,
    #[arg(long, allow_hyphen_values = true)]
    pub omega: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub m: i32,
    #[arg(long)]
    pub ell: i32,
}

#[derive(Subcommand, Debug)]
pub enum AngularCmd {
    /// Spheroidal eigenvalue S̄ and expansion coefficients at spheroidicity c = aω.
    Spheroidal {
        #[arg(long, allow_hyphen_values = true)]
        s: i32,
        #[arg(long, allow_hyphen_values = true)]
        m: i32,
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
        #[arg(long)]
        ell: i32,
    },
    /// Teukolsky–Starobinsky constant; without a mode, sweeps the configured grid.
    Tsconst {
        #[arg(long, allow_hyphen_values = true)]
        s: Option<i32>,
        #[arg(long, allow_hyphen_values = true)]
        omega: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        m: Option<i32>,
        #[arg(long)]
        ell: Option<i32>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BcArg {
    HorizonIn,
    HorizonOut,
    InfinityIn,
    InfinityOut,
}

impl From<BcArg> for Bc {
    fn from(b: BcArg) -> Bc {
        match b {
            BcArg::HorizonIn => Bc::HorizonIn,
            BcArg::HorizonOut => Bc::HorizonOut,
            BcArg::InfinityIn => Bc::InfinityIn,
            BcArg::InfinityOut => Bc::InfinityOut,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum RadialCmd {
    /// Integrate one mode from its boundary condition.
    Solve {
        #[command(flatten)]
        mode: ModeArgs,
        #[arg(long, value_enum, default_value = "horizon-in")]
        bc: BcArg,
        /// Inner radius as an offset from r₊.
        #[arg(long, default_value_t = 0.01)]
        inner: f64,
        #[arg(long, default_value_t = 30.0)]
        outer: f64,
        /// Print every n-th grid point.
        #[arg(long, default_value_t = 100)]
        stride: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Route {
    /// Build the pair from a solution ψ of the flipped equation.
    Psi,
    /// Build the pair from a Hertz potential.
    Hertz,
}

#[derive(Subcommand, Debug)]
pub enum TsCmd {
    /// Build the physical pair and report identity residuals.
    Check {
        #[command(flatten)]
        mode: ModeArgs,
        #[arg(long, value_enum, default_value = "horizon-in")]
        bc: BcArg,
        #[arg(long, value_enum, default_value = "psi")]
        route: Route,
    },
}

#[derive(Subcommand, Debug)]
pub enum UnruhCmd {
    /// Thermal kernels χ± at the Hawking temperature.
    Kernel {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-2,-1,0,1,2")]
        x: Vec<f64>,
    },
}

/// Exit code on success, check failure and configuration error.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// Parse arguments and run; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_CONFIG;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    let cfg = match parse_config(cli.global.config.as_deref(), cli.global.partial()) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    match execute(&cli.command, &cfg, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            EXIT_FAIL
        }
    }
}

fn execute(cmd: &Command, cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> anyhow::Result<i32> {
    let (name, rows) = match cmd {
        Command::Verify { suite, inject_fault } => return verify(cfg, *suite, *inject_fault, stdout, stderr),
        Command::Geometry { action: GeometryCmd::Eval { r, theta } } => ("geometry eval", geometry_eval(cfg, *r, *theta)?),
        Command::Tetrad { action: TetradCmd::Check { r, theta } } => ("tetrad check", tetrad_check(cfg, *r, *theta)?),
        Command::Angular { action: AngularCmd::Spheroidal { s, m, c, ell } } => ("angular spheroidal", spheroidal(*s, *m, *c, *ell)?),
        Command::Angular { action: AngularCmd::Tsconst { s, omega, m, ell } } => ("angular tsconst", tsconst(cfg, *s, *omega, *m, *ell)?),
        Command::Radial { action: RadialCmd::Solve { mode, bc, inner, outer, stride } } => ("radial solve", radial_solve(cfg, mode, (*bc).into(), *inner, *outer, *stride)?),
        Command::Ts { action: TsCmd::Check { mode, bc, route } } => ("ts check", ts_check(cfg, mode, (*bc).into(), *route)?),
        Command::Unruh { action: UnruhCmd::Kernel { x } } => ("unruh kernel", kernel(cfg, x)?),
    };
    write_rows(stdout, cfg.format, name, cfg, &rows)?;
    Ok(EXIT_OK)
}

fn verify(cfg: &RunConfig, suite: Suite, fault: Option<Fault>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> anyhow::Result<i32> {
    let faults = Faults { gamma_sign: fault == Some(Fault::GammaSign) };
    let checks = run_suite(cfg, suite, faults);
    let ext = match cfg.format {
        Format::Json => "json",
        Format::Csv => "csv",
    };
    std::fs::create_dir_all(&cfg.output_dir)?;
    let path = cfg.output_dir.join(format!("verify-{}.{ext}", suite.name()));
    let mut file = std::io::BufWriter::new(std::fs::File::create(&path)?);
    write_report(&mut file, cfg.format, suite.name(), cfg, &checks)?;
    file.flush()?;
    write_report(stdout, cfg.format, suite.name(), cfg, &checks)?;
    for c in checks.iter().filter(|c| !c.pass) {
        writeln!(stderr, "FAIL {}: {} (residual {:e} > {:e}) {}", c.id, c.equation, c.residual, c.tolerance, c.detail)?;
    }
    let s = Summary::of(&checks);
    let secs: f64 = checks.iter().map(|c| c.seconds).sum();
    writeln!(stderr, "{} checks, {} passed, {} failed in {secs:.1} s; report at {}", s.total, s.passed, s.failed, path.display())?;
    Ok(if s.failed == 0 { EXIT_OK } else { EXIT_FAIL })
}

fn geometry_eval(cfg: &RunConfig, r: f64, theta: f64) -> anyhow::Result<Vec<Row>> {
    let p = cfg.params;
    let h = p.horizons();
    let pt = ChartPoint::bl(0.0, r, theta, 0.0);
    let (r_star, twist) = geometry::tortoise_canonical(&p, r);
    let psi2 = p.psi2(r, theta);
    let mut rows = vec![
        Row::new("horizon", "r_plus", h.r_plus),
        Row::new("horizon", "r_minus", h.r_minus),
        Row::new("horizon", "kappa_plus", p.kappa_plus()),
        Row::new("horizon", "beta", p.beta()),
        Row::new("point", "delta", p.delta(r)),
        Row::new("point", "rho2", p.rho2(r, theta)),
        Row::new("point", "psi2_re", psi2.re),
        Row::new("point", "psi2_im", psi2.im),
        Row::new("point", "r_star", r_star),
        Row::new("point", "phi_twist", twist),
        Row::new("point", "kruskal_uv", p.kruskal_uv(r)),
        Row::new("point", "ricci_scalar", geometry::ricci_scalar(&p, &pt)?),
        Row::new("point", "compatibility_residual", geometry::metric_compatibility_residual(&p, &pt)?),
    ];
    let g = geometry::metric(&p, &pt)?.g;
    for a in 0..4 {
        for b in a..4 {
            rows.push(Row::new("metric", format!("g_{a}{b}"), g[(a, b)]));
        }
    }
    Ok(rows)
}

fn complex_rows(rows: &mut Vec<Row>, item: &str, q: &str, v: C64) {
    rows.push(Row::new(item, format!("{q}_re"), v.re));
    rows.push(Row::new(item, format!("{q}_im"), v.im));
}

fn tetrad_check(cfg: &RunConfig, r: f64, th: f64) -> anyhow::Result<Vec<Row>> {
    let p = cfg.params;
    let pt = ChartPoint::bl(0.0, r, th, 0.0);
    let frame = tetrad::frame_check(&p, &tetrad::tetrad_build(&p, &pt, Scaling::Kinnersley)?)?;
    let g = tetrad::ghp_at(&p, &pt, &Scaling::Kinnersley)?;
    let div = tetrad::gamma_divergence(&p, &pt, &Scaling::Kinnersley, 1e-2 * p.m)?;
    let mut rows = vec![Row::new("frame", "max_residual", frame.max_residual), Row::new("frame", "orientation", frame.orientation as f64)];
    let pairs = [
        ("l_gamma", g.l_gamma(), closed::l_gamma(&p, r, th)),
        ("n_gamma", g.n_gamma(), closed::n_gamma(&p, r, th)),
        ("div_gamma", div, C64::from(closed::div_gamma(&p, r, th))),
        ("gamma_square", g.gamma_square(), closed::gamma_square(&p, r, th)),
    ];
    for (name, num, cl) in pairs {
        complex_rows(&mut rows, name, "numeric", num);
        complex_rows(&mut rows, name, "closed", cl);
        rows.push(Row::new(name, "relative_residual", (num - cl).norm() / cl.norm()));
    }
    Ok(rows)
}

fn spheroidal(s: i32, m: i32, c: f64, ell: i32) -> anyhow::Result<Vec<Row>> {
    let mode = angular::spheroidal_mode(s, m, c, ell)?;
    let mut rows = vec![Row::new("eigen", "sbar", mode.sbar), Row::new("eigen", "lambda", mode.lambda())];
    for (k, v) in mode.coeffs.iter().enumerate() {
        rows.push(Row::new(format!("l={}", mode.lmin + k as i32), "coefficient", *v));
    }
    Ok(rows)
}

fn tsconst(cfg: &RunConfig, s: Option<i32>, omega: Option<f64>, m: Option<i32>, ell: Option<i32>) -> anyhow::Result<Vec<Row>> {
    let p = cfg.params;
    let mut modes = Vec::new();
    match (s, omega, m, ell) {
        (Some(s), Some(w), Some(m), Some(l)) => modes.push((s, w, m, l)),
        (None, None, None, None) => {
            for &s in cfg.spins.iter().filter(|s| **s > 0) {
                for &w in &cfg.omegas {
                    for m in -cfg.m_max..=cfg.m_max {
                        for l in angular::lmin(s, m)..=cfg.ell_max {
                            modes.push((s, w, m, l));
                        }
                    }
                }
            }
        }
        _ => anyhow::bail!("give all of --s, --omega, --m, --ell or none of them"),
    }
    let mut rows = Vec::new();
    for (s, w, m, l) in modes {
        let ev = angular::ts_eigenvalue(&p, s, w, m, l)?;
        let item = format!("s={s} omega={w} m={m} l={l}");
        rows.push(Row::new(&item, "sbar", ev.sbar));
        rows.push(Row::new(&item, "N", ev.n));
        rows.push(Row::new(&item, "oracle", angular::ts_oracle(&p, s, w, m, l)?));
        rows.push(Row::new(&item, "margin", angular::ts_margin(&p, &ev)));
    }
    Ok(rows)
}

fn radial_solve(cfg: &RunConfig, a: &ModeArgs, bc: Bc, inner: f64, outer: f64, stride: usize) -> anyhow::Result<Vec<Row>> {
    let p = cfg.params;
    let mode = ModeSpec::new(p, a.s, a.omega, a.m, a.ell)?;
    let sol = radial::integrate_mode(&mode, bc, (p.r_plus() + inner, outer), radial::DEFAULT_TOL)?;
    let mut rows = vec![Row::new("solution", "sbar", mode.sbar), Row::new("solution", "residual", sol.residual()?)];
    let stride = stride.max(1);
    let last = sol.len() - 1;
    for i in (0..sol.len()).filter(|i| i % stride == 0 || *i == last) {
        let item = format!("i={i}");
        rows.push(Row::new(&item, "r", sol.grid[i]));
        complex_rows(&mut rows, &item, "R", sol.value[i]);
        complex_rows(&mut rows, &item, "dR", sol.derivative[i]);
    }
    Ok(rows)
}

fn ts_check(cfg: &RunConfig, a: &ModeArgs, bc: Bc, route: Route) -> anyhow::Result<Vec<Row>> {
    let p = cfg.params;
    let mode = ModeSpec::new(p, a.s, a.omega, a.m, a.ell)?;
    let gen = radial::integrate_mode(&mode.flipped(), bc, (p.r_plus() + 0.2 * p.m, 20.0 * p.m), 1e-12)?;
    let pair = match route {
        Route::Psi => tsid::physical_pair(&mode, &gen)?,
        Route::Hertz => tsid::hertz_reconstruct(&mode, &gen)?,
    };
    let ts = tsid::ts_residuals(&pair)?;
    let c = pair.checks;
    let mut rows = vec![
        Row::new("mode", "N", pair.n),
        Row::new("identity", "plus", ts.plus),
        Row::new("identity", "minus", ts.minus),
        Row::new("identity", "bar_minus", ts.bar_minus),
        Row::new("pair", "b_consistency", c.b_consistency),
        Row::new("pair", "exchange", c.exchange),
        Row::new("pair", "a_diagonal", c.a_diagonal),
        Row::new("pair", "phi_s_residual", c.phi_s_residual),
    ];
    if let Some(h) = c.hertz_rel2 {
        rows.push(Row::new("pair", "hertz_rel2", h));
    }
    Ok(rows)
}

fn kernel(cfg: &RunConfig, xs: &[f64]) -> anyhow::Result<Vec<Row>> {
    let mut rows = Vec::new();
    for &x in xs {
        let k = unruh::thermal_kernels(x, cfg.params.kappa_plus())?;
        let item = format!("x={x}");
        rows.push(Row::new(&item, "chi_plus", k.chi_plus));
        rows.push(Row::new(&item, "chi_minus", k.chi_minus));
        rows.push(Row::new(&item, "beta", k.beta));
    }
    Ok(rows)
}
