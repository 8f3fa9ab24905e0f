//! Entry point of the `scenario-sizer` binary; all behaviour lives in
//! [`scenario_sizer::cli`].

fn main() {
    std::process::exit(scenario_sizer::cli::run_cli());
}
