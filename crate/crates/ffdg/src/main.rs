fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format(|buf, record| {
            use std::io::Write;
            writeln!(buf, "{}: {}", record.level().as_str().to_lowercase(), record.args())
        })
        .init();
    std::process::exit(ffdg::cli::run(std::env::args_os()));
}
