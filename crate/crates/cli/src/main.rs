mod args;
mod commands;
mod config;
mod load;

use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use args::{Cli, Command, PoolCommand};
use commands::Ctx;
use config::{RunConfig, DEFAULT_SEED};

fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(jobs) = cli.jobs.or(cfg.jobs) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("configuring worker threads")?;
    }
    let seed = cli.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let output = cfg.output(cli.output.as_ref());
    if !matches!(cli.command, Command::Serve(_) | Command::Clean(_)) {
        println!("seed: {seed}");
    }
    let mut ctx = Ctx { cfg, seed, output, root: cli.input.clone() };
    match &cli.command {
        Command::Synth => commands::synth(&ctx),
        Command::Pool(PoolCommand::Make(a)) => commands::pool_make(&ctx, a),
        Command::Pool(PoolCommand::Growth(a)) => commands::pool_growth(&ctx, a),
        Command::Eval(a) => commands::eval(&ctx, a),
        Command::Trel(c) => commands::trel(&ctx, c),
        Command::Agree(a) => commands::agree(&ctx, a),
        Command::Stability(c) => commands::stability(&ctx, c),
        Command::Incomplete(a) => commands::incomplete(&ctx, a),
        Command::Qc(c) => commands::qc(&ctx, c),
        Command::Clean(a) => commands::clean(&ctx, a),
        Command::Serve(a) => commands::serve(&ctx, a),
        Command::Pipeline(a) => commands::pipeline(&mut ctx, a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
