// Driving the batch entry points from a `key = value` configuration,
// as the command-line binary does.

use levy_spde::cli::{run, RunConfig, Subcommand};

pub fn run_example() -> levy_spde::Result<()> {
    let out = std::env::temp_dir().join(format!("levy-spde-example-{}", std::process::id()));
    let text = format!(
        "side = 8\nlambda = 0.1\nsamples = 20000\nz = 1\nsigma2 = 0\natoms = 1:0.5, -1:0.5\ntimestamp = false\nout = {}\n",
        out.display()
    );
    let cfg = RunConfig::from_text(&text)?;
    for cmd in [Subcommand::Trees, Subcommand::Graphs, Subcommand::Eval, Subcommand::Pipeline] {
        let res = run(cmd, &cfg)?;
        println!("{cmd:?}: {} files", res.files.len());
    }
    let effective = std::fs::read_to_string(out.join("config.txt"))?;
    println!("round trip of the dumped config: {}", RunConfig::from_text(&effective)? == cfg);
    print!("{}", std::fs::read_to_string(out.join("fit_report.txt"))?);
    std::fs::remove_dir_all(&out)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> levy_spde::Result<()> {
    run_example()
}
