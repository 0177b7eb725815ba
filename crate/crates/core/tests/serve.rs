use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use serde_json::{json, Value};
use tokio::net::TcpListener;
use tokio_tungstenite::tungstenite::Message;

use velo::serve::{
    parse_client_message, spawn_server, ClientMessage, Pose, RewardTerms, ServeConfig, ServerHandle, ServerMessage,
    Session, TelemetryFrame, Twist,
};
use velo::sim::{DomainParams, EnvConfig, ProportionalController};

const CONTRACT: &str = include_str!("../../../docs/protocol.json");

type Client = tokio_tungstenite::WebSocketStream<tokio_tungstenite::MaybeTlsStream<tokio::net::TcpStream>>;

async fn start() -> ServerHandle {
    let session = Session::new(ProportionalController::default(), &EnvConfig::default(), ServeConfig::default()).unwrap();
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    spawn_server(session, listener).await.unwrap()
}

async fn connect(h: &ServerHandle) -> Client {
    let (ws, _) = tokio_tungstenite::connect_async(format!("ws://{}", h.addr)).await.unwrap();
    ws
}

async fn next_message(ws: &mut Client) -> ServerMessage {
    loop {
        let msg = tokio::time::timeout(Duration::from_secs(2), ws.next())
            .await
            .expect("server went quiet")
            .unwrap()
            .unwrap();
        if let Message::Text(t) = msg {
            return serde_json::from_str(&t).unwrap();
        }
    }
}

async fn next_frame(ws: &mut Client) -> TelemetryFrame {
    loop {
        if let ServerMessage::Telemetry(f) = next_message(ws).await {
            return f;
        }
    }
}

async fn send(ws: &mut Client, v: Value) {
    ws.send(Message::Text(v.to_string())).await.unwrap();
}

// contract checking: a spec is a type name, a named type, an object of
// field specs, or an array of element specs; a trailing "?" marks optional

fn conforms(value: &Value, spec: &Value, types: &Value) -> Result<(), String> {
    match spec {
        Value::String(s) => {
            let name = s.trim_end_matches('?');
            let ok = match name {
                "number" => value.is_number(),
                "integer" => value.is_u64() || value.is_i64(),
                "boolean" => value.is_boolean(),
                "string" => value.is_string(),
                other => {
                    let t = types.get(other).ok_or(format!("unknown type {other}"))?;
                    return conforms(value, t, types);
                }
            };
            ok.then_some(()).ok_or(format!("{value} is not a {name}"))
        }
        Value::Array(items) => {
            let items: Vec<_> = items.iter().filter(|i| i.as_str() != Some("?")).collect();
            let arr = value.as_array().ok_or(format!("{value} is not an array"))?;
            if arr.len() != items.len() {
                return Err(format!("{value} has {} items, expected {}", arr.len(), items.len()));
            }
            arr.iter().zip(items).try_for_each(|(v, s)| conforms(v, s, types))
        }
        Value::Object(fields) => {
            let obj = value.as_object().ok_or(format!("{value} is not an object"))?;
            for k in obj.keys() {
                if k != "type" && !fields.contains_key(k) {
                    return Err(format!("field {k} is not in the contract"));
                }
            }
            for (k, s) in fields {
                match obj.get(k) {
                    Some(Value::Null) | None if is_optional(s) => {}
                    Some(v) => conforms(v, s, types).map_err(|e| format!("{k}: {e}"))?,
                    None => return Err(format!("missing field {k}")),
                }
            }
            Ok(())
        }
        _ => Err(format!("bad spec {spec}")),
    }
}

fn is_optional(spec: &Value) -> bool {
    match spec {
        Value::String(s) => s.ends_with('?'),
        Value::Array(a) => a.last().and_then(Value::as_str) == Some("?"),
        _ => false,
    }
}

fn check_message(v: &Value, direction: &str, contract: &Value) -> Result<(), String> {
    let ty = v["type"].as_str().ok_or("no type field")?;
    let spec = contract[direction].get(ty).ok_or(format!("type {ty} not in contract"))?;
    conforms(v, spec, &contract["types"])
}

fn sample_frame() -> TelemetryFrame {
    TelemetryFrame {
        tick: 7,
        timestamp: 1.7e9,
        sim_time: 0.14,
        paused: false,
        target: Twist::new(1.0, 0.0, 0.5),
        commanded: Twist::new(0.28, 0.0, 0.5),
        achieved: Twist::new(0.2, 0.01, 0.4),
        pose: Pose { x: 0.1, y: 0.0, yaw: 0.02 },
        reward: RewardTerms { lin: 0.01, ang: 0.005, action_rate: -1e-4, wrench: -2e-5, total: 0.0149 },
        params: DomainParams::default(),
    }
}

#[test]
fn contract_matches_server_messages() {
    let contract: Value = serde_json::from_str(CONTRACT).unwrap();
    let msgs = [
        ServerMessage::Telemetry(sample_frame()),
        ServerMessage::Error { msg: "bad".into() },
        ServerMessage::Notice { msg: "reset".into() },
    ];
    for m in &msgs {
        let v: Value = serde_json::from_str(&m.to_json()).unwrap();
        check_message(&v, "server_to_client", &contract).unwrap();
    }
    assert_eq!(contract["server_to_client"].as_object().unwrap().len(), msgs.len());
}

#[test]
fn contract_matches_client_messages() {
    let contract: Value = serde_json::from_str(CONTRACT).unwrap();
    let all = [
        ClientMessage::Command { vx: 1.0, vy: 0.0, wz: -0.5 },
        ClientMessage::Pause {},
        ClientMessage::Resume {},
        ClientMessage::Reset {},
        ClientMessage::SetParams {
            friction: Some(0.4),
            payload_mass: None,
            com_offset: Some([0.01, 0.0]),
            motor_scale: None,
            roughness: Some(5.0),
        },
    ];
    for m in &all {
        let v = serde_json::to_value(m).unwrap();
        check_message(&v, "client_to_server", &contract).unwrap();
    }
    let kinds = contract["client_to_server"].as_object().unwrap();
    assert_eq!(kinds.len(), all.len());
    // the smallest document the contract allows for each kind is accepted
    for (kind, spec) in kinds {
        let mut doc = json!({ "type": kind });
        for (field, s) in spec.as_object().unwrap() {
            if !is_optional(s) {
                doc[field] = json!(0.5);
            }
        }
        parse_client_message(&doc.to_string()).unwrap_or_else(|e| panic!("{kind}: {e}"));
        let mut extra = doc.clone();
        extra["unexpected"] = json!(1);
        assert!(parse_client_message(&extra.to_string()).is_err(), "{kind} accepted an unknown field");
    }
}

#[test]
fn telemetry_round_trips() {
    let m = ServerMessage::Telemetry(sample_frame());
    let back: ServerMessage = serde_json::from_str(&m.to_json()).unwrap();
    assert_eq!(back, m);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn no_client_keeps_the_simulator_idle() {
    let h = start().await;
    tokio::time::sleep(Duration::from_millis(200)).await;
    let s = h.status();
    assert!(s.idle);
    assert_eq!(s.ticks, 0);
    let mut ws = connect(&h).await;
    let f = next_frame(&mut ws).await;
    assert!(f.tick >= 1);
    ws.close(None).await.unwrap();
    drop(ws);
    tokio::time::sleep(Duration::from_millis(200)).await;
    let a = h.status();
    tokio::time::sleep(Duration::from_millis(200)).await;
    let b = h.status();
    assert!(b.idle);
    assert_eq!(a.ticks, b.ticks);
    h.shutdown().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn two_clients_receive_identical_frames() {
    let h = start().await;
    let mut a = connect(&h).await;
    let mut b = connect(&h).await;
    send(&mut a, json!({"type": "command", "vx": 1.0, "vy": 0.0, "wz": 0.0})).await;
    // align both streams on a tick seen after both subscribed
    let fa = next_frame(&mut a).await;
    let mut fb = next_frame(&mut b).await;
    let mut fa2 = fa;
    while fa2.tick < fb.tick {
        fa2 = next_frame(&mut a).await;
    }
    while fb.tick < fa2.tick {
        fb = next_frame(&mut b).await;
    }
    for _ in 0..20 {
        assert_eq!(fa2, fb);
        fa2 = next_frame(&mut a).await;
        fb = next_frame(&mut b).await;
    }
    h.shutdown().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn malformed_message_gets_an_error_and_keeps_the_connection() {
    let h = start().await;
    let mut ws = connect(&h).await;
    ws.send(Message::Text("{not json".into())).await.unwrap();
    loop {
        if let ServerMessage::Error { msg } = next_message(&mut ws).await {
            assert!(!msg.is_empty());
            break;
        }
    }
    send(&mut ws, json!({"type": "command", "vx": 1.5})).await;
    loop {
        if let ServerMessage::Error { .. } = next_message(&mut ws).await {
            break;
        }
    }
    send(&mut ws, json!({"type": "set_params", "friction": -2.0})).await;
    loop {
        if let ServerMessage::Error { .. } = next_message(&mut ws).await {
            break;
        }
    }
    send(&mut ws, json!({"type": "command", "vx": 1.5, "vy": 0.0, "wz": 0.0})).await;
    let mut f = next_frame(&mut ws).await;
    for _ in 0..10 {
        if f.target.vx == 1.5 {
            break;
        }
        f = next_frame(&mut ws).await;
    }
    assert_eq!(f.target.vx, 1.5);
    assert_eq!(f.params.friction, 1.0);
    h.shutdown().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn commands_are_clamped_ramped_and_tracked() {
    let h = start().await;
    let mut ws = connect(&h).await;
    send(&mut ws, json!({"type": "command", "vx": 40.0, "vy": 0.0, "wz": 0.0})).await;
    let mut prev = next_frame(&mut ws).await;
    for _ in 0..10 {
        let f = next_frame(&mut ws).await;
        assert!(f.target.vx <= 6.0);
        assert!(f.tick > prev.tick);
        let steps = (f.tick - prev.tick) as f64;
        assert!(f.commanded.vx - prev.commanded.vx <= 2.0 / 50.0 * steps + 1e-9);
        prev = f;
    }
    send(&mut ws, json!({"type": "command", "vx": 1.0, "vy": 0.0, "wz": 0.0})).await;
    let mut f = prev;
    let start_tick = f.tick;
    while f.tick < start_tick + 150 {
        f = next_frame(&mut ws).await;
    }
    assert!((f.achieved.vx - 1.0).abs() < 0.3, "vx {}", f.achieved.vx);
    h.shutdown().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn pause_and_reset() {
    let h = start().await;
    let mut ws = connect(&h).await;
    send(&mut ws, json!({"type": "command", "vx": 1.0, "vy": 0.0, "wz": 0.0})).await;
    let mut f = next_frame(&mut ws).await;
    while f.pose.x <= 0.01 {
        f = next_frame(&mut ws).await;
    }
    send(&mut ws, json!({"type": "pause"})).await;
    while !f.paused {
        f = next_frame(&mut ws).await;
    }
    let g = next_frame(&mut ws).await;
    assert!(g.tick > f.tick);
    assert_eq!(g.pose, f.pose);
    send(&mut ws, json!({"type": "reset"})).await;
    send(&mut ws, json!({"type": "resume"})).await;
    let mut r = next_frame(&mut ws).await;
    while r.paused {
        r = next_frame(&mut ws).await;
    }
    assert!(r.pose.x < g.pose.x);
    h.shutdown().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn stalled_client_does_not_slow_the_ticker() {
    let h = start().await;
    // never read from this one
    let _stalled = connect(&h).await;
    let mut ws = connect(&h).await;
    let first = next_frame(&mut ws).await;
    let t0 = std::time::Instant::now();
    let mut last = first;
    while t0.elapsed() < Duration::from_secs(2) {
        last = next_frame(&mut ws).await;
    }
    let rate = (last.tick - first.tick) as f64 / t0.elapsed().as_secs_f64();
    assert!(rate > 40.0 && rate < 55.0, "tick rate {rate}");
    h.shutdown().await;
}
