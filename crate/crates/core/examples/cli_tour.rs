//! The command line driven in-process: the same calls as
//! `ultras <args>`, with exit codes and output captured.
//!
//! Run with `cargo run --example cli_tour`.

use ultras::cli::run;

fn main() {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data");
    let calls: Vec<Vec<String>> = vec![
        vec!["monoid".into(), format!("{data}/m4.table")],
        vec!["check".into(), format!("{data}/buffer.spec"), format!("{data}/overlap.spec")],
        vec!["bisim".into(), format!("{data}/pepa1.spec"), format!("{data}/pepa2.spec"), "--roots".into(), "P,Q".into()],
        vec!["pepa".into(), "compare".into(), format!("{data}/race.pepa"), "--roots".into(), "Race,Single".into()],
        vec!["minimize".into(), format!("{data}/buffer.spec"), "--format".into(), "graph".into()],
        vec!["translate".into(), format!("{data}/coins.sgsos")],
    ];
    for args in calls {
        let shown: Vec<&str> = args.iter().map(|a| a.rsplit('/').next().unwrap()).collect();
        println!("$ ultras {}", shown.join(" "));
        let r = run(std::iter::once("ultras".to_string()).chain(args));
        print!("{}{}", r.stdout, r.stderr);
        println!("[exit {}]\n", r.code);
    }
}
