use std::net::SocketAddr;
use std::path::PathBuf;
use std::time::Duration;

use clap::Parser;
use illusionpad_server::{app, AppState, ServerConfig};

#[derive(Debug, Parser)]
#[command(
    name = "illusionpad-server",
    version,
    about = "HTTP service for hybrid keypads"
)]
struct Args {
    #[arg(long, env = "ILLUSIONPAD_PORT", default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    bind: String,
    /// Directory of extra device profiles (`<name>.json`).
    #[arg(long, env = "ILLUSIONPAD_PROFILES")]
    profiles: Option<PathBuf>,
    /// Concurrent compute jobs; defaults to the CPU count.
    #[arg(long)]
    workers: Option<usize>,
    /// Session lifetime in seconds.
    #[arg(long, default_value_t = 900)]
    session_ttl: u64,
}

#[tokio::main]
async fn main() -> std::process::ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let mut config = ServerConfig {
        profiles_dir: args.profiles,
        session_ttl: Duration::from_secs(args.session_ttl),
        ..ServerConfig::default()
    };
    if let Some(w) = args.workers {
        config.workers = w;
    }
    let addr: SocketAddr = match format!("{}:{}", args.bind, args.port).parse() {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: invalid bind address: {e}");
            return std::process::ExitCode::from(2);
        }
    };
    let listener = match tokio::net::TcpListener::bind(addr).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: cannot bind {addr}: {e}");
            return std::process::ExitCode::from(2);
        }
    };
    log::info!("listening on {addr}");
    if let Err(e) = axum::serve(listener, app(AppState::new(config))).await {
        eprintln!("error: {e}");
        return std::process::ExitCode::from(1);
    }
    std::process::ExitCode::SUCCESS
}
