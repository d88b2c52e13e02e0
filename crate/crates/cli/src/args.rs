use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use sn_core::solver::ShootingConfig;
use sn_core::Sign;

#[derive(Debug, Parser)]
#[command(
    name = "snewton",
    version,
    about = "Schrödinger–Newton ground state, tail law and norm bounds"
)]
pub struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory (created if missing).
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for independent solves and window scans.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the plain equation and write the ground state and profiles.
    Solve(ShootArgs),
    /// Solve the point-charge variant by a fixed point on the charge.
    Hartree(HartreeArgs),
    /// Fit the tail law to a stored ln u profile.
    Fit(FitArgs),
    /// Closed-form norm and energy bounds.
    Bounds(BoundsArgs),
    /// Consistency, classification and bounds for a stored solve.
    Report(InputArgs),
    /// Figure datasets for a stored solve.
    Plotdata(PlotArgs),
}

#[derive(Debug, Args, Default)]
pub struct ShootArgs {
    #[arg(long)]
    pub u0: Option<f64>,
    #[arg(long)]
    pub w_lo: Option<f64>,
    #[arg(long)]
    pub w_hi: Option<f64>,
    #[arg(long)]
    pub bisect_tol: Option<f64>,
    /// Scale-free shooting horizon.
    #[arg(long)]
    pub r_max_scalefree: Option<f64>,
    #[arg(long)]
    pub switch_threshold: Option<f64>,
    #[arg(long)]
    pub match_tol: Option<f64>,
    /// End of the output grid in final units.
    #[arg(long, alias = "r-max")]
    pub rmax: Option<f64>,
    #[arg(long)]
    pub grid_step: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
}

impl ShootArgs {
    pub fn apply(&self, cfg: &mut ShootingConfig) {
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$flag { cfg.$($field).+ = v; })*
            };
        }
        set!(
            u0 => u0,
            w_lo => w_lo,
            w_hi => w_hi,
            bisect_tol => bisect_tol,
            r_max_scalefree => r_max_scalefree,
            switch_threshold => switch_threshold,
            match_tol => match_tol,
            rmax => r_max,
            grid_step => grid_step,
            rel_tol => step.rel_tol,
            abs_tol => step.abs_tol,
        );
    }
}

#[derive(Debug, Args)]
pub struct HartreeArgs {
    #[arg(long)]
    pub sign: Option<Sign>,
    /// One coupling, or a comma-separated list for a sweep.
    #[arg(long, value_delimiter = ',')]
    pub zeta: Vec<f64>,
    /// Allow the minus sign for 0.825 <= zeta <= 1.
    #[arg(long)]
    pub exploratory: bool,
    #[arg(long)]
    pub damping: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Relative tolerance of the fixed point.
    #[arg(long)]
    pub fp_tol: Option<f64>,
    #[command(flatten)]
    pub shoot: ShootArgs,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Directory holding a previous solve (defaults to the output directory).
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Window start; the window is chosen automatically unless both ends are given.
    #[arg(long, requires = "r2")]
    pub r1: Option<f64>,
    #[arg(long, requires = "r1")]
    pub r2: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Measured ‖u‖₂² to place between the bounds.
    #[arg(long, conflicts_with = "from")]
    pub measured: Option<f64>,
    /// Take the measured norm from a previous solve in this directory.
    #[arg(long)]
    pub from: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Largest radius in the datasets.
    #[arg(long)]
    pub plot_rmax: Option<f64>,
    /// Also write fig1.svg .. fig5.svg.
    #[arg(long)]
    pub svg: bool,
}
