use std::io;

fn main() {
    let env = |key: &str| std::env::var(key).ok();
    let code = kgschema_cli::run(
        std::env::args_os(),
        &env,
        &mut io::stdin().lock(),
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
    );
    std::process::exit(code);
}
