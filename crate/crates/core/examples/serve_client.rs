//! Start the teleop server in-process and pilot it with a scripted client:
//! drive forward, turn, cut the friction, then reset.
//!
//!     cargo run --release --example serve_client -- [checkpoint.ckpt]
//!
//! Without a checkpoint the proportional tracker drives the simulator.

use std::path::Path;
use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use serde_json::json;
use tokio_tungstenite::tungstenite::Message;
use velo::experiment::load_for_eval;
use velo::policy::{Controller, DeployedPolicy};
use velo::serve::{spawn_server, ServeConfig, ServerMessage, Session};
use velo::sim::{EnvConfig, ProportionalController};

async fn pilot<C: Controller + Send + 'static>(controller: C, env: &EnvConfig) -> anyhow::Result<()> {
    let session = Session::new(controller, env, ServeConfig::default())?;
    let server = spawn_server(session, tokio::net::TcpListener::bind("127.0.0.1:0").await?).await?;
    println!("server on ws://{}", server.addr);
    let (mut ws, _) = tokio_tungstenite::connect_async(format!("ws://{}", server.addr)).await?;

    let script = [
        (json!({"type": "command", "vx": 1.5, "vy": 0.0, "wz": 0.0}), "forward 1.5 m/s"),
        (json!({"type": "command", "vx": 1.5, "vy": 0.0, "wz": 1.5}), "turn at 1.5 rad/s"),
        (json!({"type": "set_params", "friction": 0.1}), "friction 0.1"),
        (json!({"type": "reset"}), "reset"),
    ];
    for (msg, label) in script {
        ws.send(Message::Text(msg.to_string())).await?;
        println!("-- {label}");
        let until = tokio::time::Instant::now() + Duration::from_secs(2);
        let mut shown = 0;
        while tokio::time::Instant::now() < until {
            let Some(Ok(Message::Text(t))) = ws.next().await else { break };
            match serde_json::from_str::<ServerMessage>(&t)? {
                ServerMessage::Telemetry(f) if f.tick % 25 == 0 => {
                    shown += 1;
                    println!(
                        "  tick {:>4}  cmd vx {:>5.2} wz {:>5.2}  got vx {:>5.2} wz {:>5.2}  pose ({:>6.2}, {:>6.2})",
                        f.tick, f.commanded.vx, f.commanded.wz, f.achieved.vx, f.achieved.wz, f.pose.x, f.pose.y
                    );
                }
                ServerMessage::Error { msg } | ServerMessage::Notice { msg } => println!("  server: {msg}"),
                _ => {}
            }
        }
        if shown == 0 {
            println!("  no telemetry");
        }
    }
    server.shutdown().await;
    Ok(())
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    match std::env::args().nth(1) {
        Some(path) => {
            let ckpt = load_for_eval(Path::new(&path), None)?;
            pilot(DeployedPolicy::from_checkpoint(&ckpt)?, &ckpt.header.env).await
        }
        None => pilot(ProportionalController::default(), &EnvConfig::default()).await,
    }
}
