use clap::Parser;
use netrel::cli::{run, Cli};
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!(
                "{}",
                serde_json::json!({"error": "threads", "message": e.to_string()})
            );
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(report) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("reports serialise")
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            let mut body = serde_json::json!({"error": e.kind(), "message": e.to_string()});
            if let netrel::Error::Invalid(report) = &e {
                body["violations"] = serde_json::to_value(&report.violations).unwrap_or_default();
            }
            eprintln!("{body}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
