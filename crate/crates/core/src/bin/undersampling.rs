use clap::Parser;

use undersampling::commands::{install_interrupt_cleanup, run, Cli};

fn main() {
    let cli = Cli::parse();
    install_interrupt_cleanup();
    std::process::exit(run(cli));
}
