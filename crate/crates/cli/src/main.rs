use std::process::ExitCode;

use clap::Parser;
use husimi_cli::args::{resolve, Cli};
use husimi_cli::{catalogue, run, write_outputs};

fn main() -> ExitCode {
    match try_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn try_main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let Some(config) = resolve(&cli)? else {
        let file = catalogue();
        print!("{}", file.contents);
        if let Some(dir) = &cli.out {
            write_outputs(dir, &[file])?;
        }
        return Ok(());
    };
    if cli.dry_run {
        println!("{}", serde_json::to_string_pretty(&config)?);
        return Ok(());
    }
    let files = run(&config)?;
    let dir = config.output_dir();
    write_outputs(&dir, &files)?;
    for f in &files {
        eprintln!("wrote {}", dir.join(&f.name).display());
        if f.name.ends_with(".json") && files.len() == 1 {
            print!("{}", f.contents);
        }
    }
    Ok(())
}
