use clap::Parser;
use samgp::cli::{dispatch, Cli};

fn main() {
    let cli = Cli::parse();
    samgp::init_parallelism();
    // Evolved trees have no depth cap; give the serial path the same stack
    // budget as the worker pool.
    let worker = std::thread::Builder::new()
        .stack_size(samgp::TREE_STACK_BYTES)
        .spawn(move || dispatch(cli))
        .expect("failed to spawn main worker thread");
    match worker.join() {
        Ok(Ok(())) => {}
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
        Err(panic) => std::panic::resume_unwind(panic),
    }
}
