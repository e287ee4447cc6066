//! Drive the command-line front end from code: regenerate the ruin
//! probability and capital-injection curves as CSV files in a directory
//! (default `./curves`).

use std::fs;
use std::path::PathBuf;

use parisian::cli;

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "curves".into()));
    fs::create_dir_all(&dir).expect("create output dir");
    let runs: [(&str, &str, &[&str]); 6] = [
        ("ruin_sigma0.csv", "ruin-prob", &["--sigma", "0", "--lambda", "0.1,0.2,0.5"]),
        ("ruin_sigma02.csv", "ruin-prob", &["--sigma", "0.2", "--lambda", "0.1,0.2,0.5"]),
        ("ruin_capped.csv", "ruin-prob", &["--xi", "capped:0.8:0.8"]),
        ("injection_sigma0.csv", "capital-injection", &["--sigma", "0"]),
        ("injection_sigma02.csv", "capital-injection", &["--sigma", "0.2"]),
        ("injection_k06.csv", "capital-injection", &["--xi", "linear:0.6"]),
    ];
    for (file, cmd, extra) in runs {
        let path = dir.join(file);
        let mut args = vec!["parisian".to_string(), cmd.to_string(), "--x-grid".into(), "0.1:10:100".into()];
        args.extend(extra.iter().map(|s| s.to_string()));
        args.extend(["--out".to_string(), path.display().to_string()]);
        match cli::run(args) {
            Ok(_) => println!("wrote {}", path.display()),
            Err(e) => {
                eprintln!("{file}: {}", e.message);
                std::process::exit(e.code);
            }
        }
    }
}
