use std::net::SocketAddr;

use clap::Parser;

use gp4nldr_service::{app, AppState, ServiceConfig};

#[derive(Parser)]
#[command(name = "gp4nldr-server", version, about = "HTTP API for gp4nldr")]
struct Args {
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    /// Answer every chat with the offline echo provider.
    #[arg(long)]
    mock: bool,
    #[arg(long, default_value_t = 2)]
    max_jobs: usize,
}

#[tokio::main]
async fn main() -> std::io::Result<()> {
    let args = Args::parse();
    let state = AppState::new(ServiceConfig {
        max_concurrent_jobs: args.max_jobs,
        force_mock: args.mock,
        preload_datasets: true,
    });
    let listener = tokio::net::TcpListener::bind(args.addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app(state)).await
}
