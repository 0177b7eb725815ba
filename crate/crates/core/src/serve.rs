//! Live teleop service: one simulator stepped in real time, driven by a
//! trained policy, with JSON commands in and telemetry out over a websocket.
//!
//! Three roles share no state: the ticker owns the session, each client has
//! a reader that forwards parsed messages to the ticker and a writer that
//! drains the telemetry broadcast. A slow client lags its own broadcast
//! receiver and loses frames; the ticker never waits on it.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use futures_util::{SinkExt, StreamExt};
use serde::{Deserialize, Serialize};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::{broadcast, mpsc, oneshot, watch};
use tokio::task::JoinHandle;
use tokio::time::MissedTickBehavior;
use tokio_tungstenite::tungstenite::Message;

use crate::error::{Error, Result};
use crate::policy::Controller;
use crate::sim::{Command, DomainParams, EnvConfig, LocomotionEnv, StepInfo};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServeConfig {
    pub tick_hz: f64,
    /// Per-axis magnitude limit on commands.
    pub max_command: Twist,
    /// Per-axis rate limit on the applied command, per second.
    pub max_accel: Twist,
    /// Parameters the simulator starts with and returns to on reset.
    pub params: DomainParams,
    pub seed: u64,
    /// Frames buffered per client before the oldest are dropped.
    pub client_buffer: usize,
}

impl Default for ServeConfig {
    fn default() -> Self {
        Self {
            tick_hz: 50.0,
            max_command: Twist::new(6.0, 1.0, 6.0),
            max_accel: Twist::new(2.0, 2.0, 4.0),
            params: DomainParams::default(),
            seed: 0,
            client_buffer: 32,
        }
    }
}

impl ServeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tick_hz > 0.0 && self.tick_hz.is_finite()) {
            return Err(Error::InvalidConfig("tick_hz must be positive".into()));
        }
        let ok = |t: &Twist| [t.vx, t.vy, t.wz].iter().all(|v| *v >= 0.0 && v.is_finite());
        if !ok(&self.max_command) || !ok(&self.max_accel) {
            return Err(Error::InvalidConfig("command limits must be finite and >= 0".into()));
        }
        if self.client_buffer == 0 {
            return Err(Error::InvalidConfig("client_buffer must be >= 1".into()));
        }
        Ok(())
    }
}

/// Planar velocity in the body frame: m/s, m/s, rad/s.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Twist {
    pub vx: f64,
    pub vy: f64,
    pub wz: f64,
}

impl Twist {
    pub const fn new(vx: f64, vy: f64, wz: f64) -> Self {
        Self { vx, vy, wz }
    }
}

impl From<Command> for Twist {
    fn from(c: Command) -> Self {
        Self::new(c.vx, c.vy, c.wz)
    }
}

impl From<Twist> for Command {
    fn from(t: Twist) -> Self {
        Command::new(t.vx, t.vy, t.wz)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RewardTerms {
    pub lin: f64,
    pub ang: f64,
    pub action_rate: f64,
    pub wrench: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TelemetryFrame {
    /// Server tick, +1 per frame.
    pub tick: u64,
    /// Wall-clock seconds since the Unix epoch.
    pub timestamp: f64,
    /// Simulated seconds since the last reset.
    pub sim_time: f64,
    pub paused: bool,
    /// Latest setpoint after clamping.
    pub target: Twist,
    /// Rate-limited command the policy is tracking.
    pub commanded: Twist,
    pub achieved: Twist,
    pub pose: Pose,
    pub reward: RewardTerms,
    pub params: DomainParams,
}

/// Client to server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    Command {
        vx: f64,
        vy: f64,
        wz: f64,
    },
    Pause {},
    Resume {},
    /// Back to the origin at rest, with the configured parameters.
    Reset {},
    /// Overrides the named domain parameters; omitted ones keep their value.
    SetParams {
        #[serde(default)]
        friction: Option<f64>,
        #[serde(default)]
        payload_mass: Option<f64>,
        #[serde(default)]
        com_offset: Option<[f64; 2]>,
        #[serde(default)]
        motor_scale: Option<f64>,
        #[serde(default)]
        roughness: Option<f64>,
    },
}

/// Server to client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Telemetry(TelemetryFrame),
    Error { msg: String },
    Notice { msg: String },
}

impl ServerMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages serialize")
    }
}

pub fn parse_client_message(text: &str) -> Result<ClientMessage> {
    Ok(serde_json::from_str(text)?)
}

fn approach(current: f64, target: f64, max_step: f64) -> f64 {
    current + (target - current).clamp(-max_step, max_step)
}

/// Simulator state owned and stepped by the ticker.
pub struct Session<C> {
    env: LocomotionEnv,
    controller: C,
    cfg: ServeConfig,
    target: Twist,
    applied: Twist,
    paused: bool,
    tick: u64,
    last: Option<StepInfo>,
}

impl<C: Controller> Session<C> {
    pub fn new(controller: C, env_cfg: &EnvConfig, cfg: ServeConfig) -> Result<Self> {
        cfg.validate()?;
        let mut env_cfg = env_cfg.clone();
        // a teleop session runs until the user resets it
        env_cfg.episode_length = usize::MAX;
        env_cfg.validate()?;
        let mut env = LocomotionEnv::new(Arc::new(env_cfg), cfg.seed);
        env.reset(Command::default(), cfg.params)?;
        Ok(Self {
            env,
            controller,
            cfg,
            target: Twist::default(),
            applied: Twist::default(),
            paused: false,
            tick: 0,
            last: None,
        })
    }

    pub fn config(&self) -> &ServeConfig {
        &self.cfg
    }

    pub fn env(&self) -> &LocomotionEnv {
        &self.env
    }

    pub fn is_paused(&self) -> bool {
        self.paused
    }

    pub fn tick_count(&self) -> u64 {
        self.tick
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.cfg.tick_hz
    }

    /// Applies one client message. Invalid requests leave the session
    /// unchanged.
    pub fn handle(&mut self, msg: ClientMessage) -> Result<()> {
        match msg {
            ClientMessage::Command { vx, vy, wz } => {
                if !(vx.is_finite() && vy.is_finite() && wz.is_finite()) {
                    return Err(Error::InvalidConfig("command must be finite".into()));
                }
                let m = self.cfg.max_command;
                self.target = Twist::new(vx.clamp(-m.vx, m.vx), vy.clamp(-m.vy, m.vy), wz.clamp(-m.wz, m.wz));
            }
            ClientMessage::Pause {} => self.paused = true,
            ClientMessage::Resume {} => self.paused = false,
            ClientMessage::Reset {} => self.reset()?,
            ClientMessage::SetParams {
                friction,
                payload_mass,
                com_offset,
                motor_scale,
                roughness,
            } => {
                let mut p = *self.env.params();
                p.friction = friction.unwrap_or(p.friction);
                p.payload_mass = payload_mass.unwrap_or(p.payload_mass);
                p.com_offset = com_offset.unwrap_or(p.com_offset);
                p.motor_scale = motor_scale.unwrap_or(p.motor_scale);
                p.roughness = roughness.unwrap_or(p.roughness);
                let finite = [p.friction, p.payload_mass, p.com_offset[0], p.com_offset[1], p.motor_scale, p.roughness]
                    .iter()
                    .all(|v| v.is_finite());
                if !finite || p.motor_scale < 0.0 || p.roughness < 0.0 {
                    return Err(Error::InvalidConfig("parameters must be finite, motor_scale and roughness >= 0".into()));
                }
                self.env.set_params(p)?;
            }
        }
        Ok(())
    }

    fn reset(&mut self) -> Result<()> {
        self.env.reset(Command::default(), self.cfg.params)?;
        self.applied = Twist::default();
        self.last = None;
        Ok(())
    }

    /// Advances one tick (unless paused) and returns its frame, plus a
    /// notice when the policy faulted and the simulator was reset.
    pub fn tick(&mut self, timestamp: f64) -> Result<(TelemetryFrame, Option<String>)> {
        let mut notice = None;
        if !self.paused {
            let step = self.dt();
            let a = self.cfg.max_accel;
            self.applied = Twist::new(
                approach(self.applied.vx, self.target.vx, a.vx * step),
                approach(self.applied.vy, self.target.vy, a.vy * step),
                approach(self.applied.wz, self.target.wz, a.wz * step),
            );
            self.env.set_command(self.applied.into());
            match self.step_policy() {
                Ok(info) if !info.fault => self.last = Some(info),
                Ok(_) => notice = Some("simulation diverged; reset to the origin".to_string()),
                Err(e) => notice = Some(format!("policy fault ({e}); reset to the origin")),
            }
            if notice.is_some() {
                self.reset()?;
            }
        }
        self.tick += 1;
        Ok((self.frame(timestamp), notice))
    }

    fn step_policy(&mut self) -> Result<StepInfo> {
        let action = self
            .controller
            .act_batch(std::slice::from_ref(&self.env))?
            .pop()
            .unwrap_or_default();
        if !action.is_finite() {
            return Err(Error::NonFiniteLoss("policy action"));
        }
        Ok(self.env.step(action)?.info)
    }

    fn frame(&self, timestamp: f64) -> TelemetryFrame {
        let s = self.env.state();
        let reward = self.last.map(|i| i.components).unwrap_or_default();
        TelemetryFrame {
            tick: self.tick,
            timestamp,
            sim_time: self.env.steps() as f64 * self.env.config().physics.control_dt(),
            paused: self.paused,
            target: self.target,
            commanded: self.applied,
            achieved: Twist::new(s.lin_vel_body[0], s.lin_vel_body[1], s.yaw_rate),
            pose: Pose {
                x: s.position[0],
                y: s.position[1],
                yaw: s.yaw,
            },
            reward: RewardTerms {
                lin: reward.lin,
                ang: reward.ang,
                action_rate: reward.action_rate,
                wrench: reward.wrench,
                total: reward.total(),
            },
            params: *self.env.params(),
        }
    }
}

fn unix_time() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

/// Observable server state.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ServerStatus {
    pub ticks: u64,
    pub clients: usize,
    /// True while the simulator waits for a client.
    pub idle: bool,
}

struct Inbound {
    msg: ClientMessage,
    reply: mpsc::UnboundedSender<String>,
}

pub struct ServerHandle {
    pub addr: SocketAddr,
    status: watch::Receiver<ServerStatus>,
    shutdown: Option<oneshot::Sender<()>>,
    join: JoinHandle<()>,
}

impl ServerHandle {
    pub fn status(&self) -> ServerStatus {
        *self.status.borrow()
    }

    pub fn status_watch(&self) -> watch::Receiver<ServerStatus> {
        self.status.clone()
    }

    pub async fn shutdown(mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        let _ = self.join.await;
    }

    /// Runs until the process is stopped.
    pub async fn wait(self) {
        let _ = self.join.await;
    }
}

/// Starts serving `session` on `listener`.
pub async fn spawn_server<C>(session: Session<C>, listener: TcpListener) -> Result<ServerHandle>
where
    C: Controller + Send + 'static,
{
    let addr = listener.local_addr().map_err(|e| Error::io("<listener>", e))?;
    let (frames_tx, _) = broadcast::channel::<String>(session.config().client_buffer);
    let (inbound_tx, inbound_rx) = mpsc::unbounded_channel::<Inbound>();
    let (status_tx, status_rx) = watch::channel(ServerStatus {
        idle: true,
        ..Default::default()
    });
    let (shutdown_tx, shutdown_rx) = oneshot::channel();
    let clients = Arc::new(AtomicUsize::new(0));

    let ticker = tokio::spawn(run_ticker(session, frames_tx.clone(), inbound_rx, status_tx, clients.clone()));
    let acceptor = tokio::spawn(async move {
        while let Ok((stream, _)) = listener.accept().await {
            tokio::spawn(run_client(stream, frames_tx.subscribe(), inbound_tx.clone(), clients.clone()));
        }
    });
    let join = tokio::spawn(async move {
        let _ = shutdown_rx.await;
        ticker.abort();
        acceptor.abort();
    });
    Ok(ServerHandle {
        addr,
        status: status_rx,
        shutdown: Some(shutdown_tx),
        join,
    })
}

async fn run_ticker<C: Controller>(
    mut session: Session<C>,
    frames: broadcast::Sender<String>,
    mut inbound: mpsc::UnboundedReceiver<Inbound>,
    status: watch::Sender<ServerStatus>,
    clients: Arc<AtomicUsize>,
) {
    // deadlines stay on the start + k * period grid; late ticks are skipped
    let mut interval = tokio::time::interval(Duration::from_secs_f64(session.dt()));
    interval.set_missed_tick_behavior(MissedTickBehavior::Skip);
    loop {
        interval.tick().await;
        while let Ok(Inbound { msg, reply }) = inbound.try_recv() {
            if let Err(e) = session.handle(msg) {
                let _ = reply.send(ServerMessage::Error { msg: e.to_string() }.to_json());
            }
        }
        let n = clients.load(Ordering::SeqCst);
        if n == 0 {
            status.send_replace(ServerStatus {
                ticks: session.tick_count(),
                clients: 0,
                idle: true,
            });
            continue;
        }
        match session.tick(unix_time()) {
            Ok((frame, notice)) => {
                if let Some(msg) = notice {
                    let _ = frames.send(ServerMessage::Notice { msg }.to_json());
                }
                let _ = frames.send(ServerMessage::Telemetry(frame).to_json());
            }
            Err(e) => {
                let _ = frames.send(ServerMessage::Error { msg: e.to_string() }.to_json());
            }
        }
        status.send_replace(ServerStatus {
            ticks: session.tick_count(),
            clients: n,
            idle: false,
        });
    }
}

async fn run_client(
    stream: TcpStream,
    mut frames: broadcast::Receiver<String>,
    inbound: mpsc::UnboundedSender<Inbound>,
    clients: Arc<AtomicUsize>,
) {
    let Ok(ws) = tokio_tungstenite::accept_async(stream).await else {
        return;
    };
    let (mut sink, mut source) = ws.split();
    let (direct_tx, mut direct_rx) = mpsc::unbounded_channel::<String>();
    clients.fetch_add(1, Ordering::SeqCst);

    let writer = tokio::spawn(async move {
        loop {
            let text = tokio::select! {
                frame = frames.recv() => match frame {
                    Ok(t) => t,
                    Err(broadcast::error::RecvError::Lagged(_)) => continue,
                    Err(broadcast::error::RecvError::Closed) => break,
                },
                direct = direct_rx.recv() => match direct {
                    Some(t) => t,
                    None => break,
                },
            };
            if sink.send(Message::Text(text)).await.is_err() {
                break;
            }
        }
    });

    while let Some(msg) = source.next().await {
        let text = match msg {
            Ok(Message::Text(t)) => t,
            Ok(Message::Binary(_)) => {
                let _ = direct_tx.send(ServerMessage::Error { msg: "expected a text frame".into() }.to_json());
                continue;
            }
            Ok(Message::Close(_)) | Err(_) => break,
            Ok(_) => continue,
        };
        match parse_client_message(&text) {
            Ok(msg) => {
                let _ = inbound.send(Inbound {
                    msg,
                    reply: direct_tx.clone(),
                });
            }
            Err(e) => {
                let _ = direct_tx.send(ServerMessage::Error { msg: e.to_string() }.to_json());
            }
        }
    }
    clients.fetch_sub(1, Ordering::SeqCst);
    writer.abort();
}
