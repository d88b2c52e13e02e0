mod args;
mod commands;
mod config;
mod error;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Context;
use config::RunConfig;
use error::CliError;

fn configure(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(j) = cli.jobs {
        cfg.jobs = j;
    }
    match &cli.command {
        Command::Solve(s) => s.apply(&mut cfg.shooting),
        Command::Hartree(h) => {
            h.shoot.apply(&mut cfg.shooting);
            if let Some(s) = h.sign {
                cfg.hartree.sign = s;
            }
            match h.zeta.as_slice() {
                [] => {}
                [z] => {
                    cfg.hartree.zeta = *z;
                    cfg.zetas.clear();
                }
                many => cfg.zetas = many.to_vec(),
            }
            cfg.hartree.exploratory |= h.exploratory;
            if let Some(d) = h.damping {
                cfg.hartree.damping = d;
            }
            if let Some(m) = h.max_iter {
                cfg.hartree.max_iter = m;
            }
            if let Some(t) = h.fp_tol {
                cfg.hartree.tol = t;
            }
        }
        Command::Fit(f) => {
            if let (Some(a), Some(b)) = (f.r1, f.r2) {
                cfg.fit_window = Some((a, b));
            }
        }
        Command::Bounds(b) => {
            if b.measured.is_some() {
                cfg.measured_norm = b.measured;
            }
        }
        Command::Report(_) => {}
        Command::Plotdata(p) => {
            if let Some(r) = p.plot_rmax {
                cfg.plot_r_max = r;
            }
            cfg.svg |= p.svg;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let ctx = Context {
        cfg: configure(cli)?,
    };
    match &cli.command {
        Command::Solve(_) => commands::solve(&ctx),
        Command::Hartree(_) => commands::hartree(&ctx),
        Command::Fit(f) => commands::fit(&ctx, &f.input.input),
        Command::Bounds(b) => commands::bounds(&ctx, &b.from),
        Command::Report(r) => commands::report(&ctx, &r.input),
        Command::Plotdata(p) => commands::plotdata(&ctx, &p.input.input),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // usage errors share the generic code so that 2 stays "invalid-bracket"
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
