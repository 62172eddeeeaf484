use std::io::ErrorKind;
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::thread;
use std::time::Duration;

use log::{info, warn};
use tungstenite::{Message, WebSocket};

use super::protocol::{ClientMessage, ServerMessage};
use super::session::SessionState;
use crate::engine::{render_frame, Scene};
use crate::error::{Error, Result};
use crate::io::{bundled_presets, imaging::encode_png};

/// How long a read waits before the session loop checks its state again.
const POLL_INTERVAL: Duration = Duration::from_millis(20);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ServeOptions {
    pub width: u32,
    pub height: u32,
    pub workers: usize,
    pub histogram_bins: usize,
}

impl Default for ServeOptions {
    fn default() -> Self {
        Self {
            width: 512,
            height: 512,
            workers: thread::available_parallelism().map_or(1, |n| n.get()),
            histogram_bins: 64,
        }
    }
}

/// Frame-streaming server. Every accepted connection gets its own session,
/// seeded with a copy of the base scene, on its own thread.
pub struct Server {
    listener: TcpListener,
    scene: Scene,
    options: ServeOptions,
}

impl Server {
    pub fn bind(addr: impl ToSocketAddrs, scene: Scene, options: ServeOptions) -> Result<Self> {
        if options.width == 0 || options.height == 0 || options.workers == 0 {
            return Err(Error::invalid("frame size and workers must be nonzero"));
        }
        Ok(Self {
            listener: TcpListener::bind(addr)?,
            scene,
            options,
        })
    }

    pub fn local_addr(&self) -> Result<SocketAddr> {
        Ok(self.listener.local_addr()?)
    }

    /// Accepts connections until the listener fails.
    pub fn run(self) -> Result<()> {
        for stream in self.listener.incoming() {
            let stream = match stream {
                Ok(s) => s,
                Err(e) => {
                    warn!("accept failed: {e}");
                    continue;
                }
            };
            let scene = self.scene.clone();
            let options = self.options;
            thread::spawn(move || {
                let peer = stream.peer_addr().ok();
                match run_session(stream, scene, options) {
                    Ok(()) => info!("session {peer:?} closed"),
                    Err(e) => warn!("session {peer:?} ended: {e}"),
                }
            });
        }
        Ok(())
    }

    /// Runs the accept loop on a background thread.
    pub fn spawn(self) -> Result<(SocketAddr, thread::JoinHandle<Result<()>>)> {
        let addr = self.local_addr()?;
        Ok((addr, thread::spawn(move || self.run())))
    }
}

/// Serves `scene` on all interfaces at `port` until interrupted.
pub fn serve(scene: Scene, port: u16, options: ServeOptions) -> Result<()> {
    let server = Server::bind(("0.0.0.0", port), scene, options)?;
    info!("serving on {}", server.local_addr()?);
    server.run()
}

type Socket = WebSocket<TcpStream>;

fn ws_err(e: tungstenite::Error) -> Error {
    match e {
        tungstenite::Error::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(other)),
    }
}

fn send_json(ws: &mut Socket, msg: &ServerMessage) -> Result<()> {
    ws.send(Message::text(msg.to_json())).map_err(ws_err)
}

fn send_error(ws: &mut Socket, message: impl Into<String>) -> Result<()> {
    send_json(
        ws,
        &ServerMessage::Error {
            message: message.into(),
        },
    )
}

fn send_frame(ws: &mut Socket, state: &mut SessionState, options: &ServeOptions) -> Result<()> {
    let (image, stats) = render_frame(state.scene(), options.width, options.height, options.workers)?;
    let png = encode_png(&image)?;
    let seq = state.next_seq();
    send_json(
        ws,
        &ServerMessage::Frame {
            seq,
            width: image.width(),
            height: image.height(),
            stats,
        },
    )?;
    ws.send(Message::binary(png)).map_err(ws_err)
}

enum Pump {
    Open,
    Closed,
}

/// Reads client messages into the session's pending slot. With `wait` the
/// call blocks until at least one message arrives; afterwards (or without
/// `wait`) it returns as soon as nothing more is queued.
fn pump(ws: &mut Socket, state: &mut SessionState, mut wait: bool) -> Result<Pump> {
    loop {
        match ws.read() {
            Ok(Message::Text(text)) => {
                wait = false;
                match serde_json::from_str::<ClientMessage>(&text) {
                    Ok(ClientMessage::Update(update)) => state.receive(update),
                    Err(e) => send_error(ws, format!("malformed message: {e}"))?,
                }
            }
            Ok(Message::Binary(_)) => {
                wait = false;
                send_error(ws, "binary client messages are not supported")?;
            }
            Ok(Message::Close(_)) => return Ok(Pump::Closed),
            Ok(_) => {}
            Err(tungstenite::Error::Io(e))
                if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) =>
            {
                if !wait {
                    return Ok(Pump::Open);
                }
            }
            Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => {
                return Ok(Pump::Closed)
            }
            Err(e) => return Err(ws_err(e)),
        }
    }
}

fn run_session(stream: TcpStream, scene: Scene, options: ServeOptions) -> Result<()> {
    stream.set_nodelay(true)?;
    let mut ws = tungstenite::accept(stream).map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    ws.get_mut().set_read_timeout(Some(POLL_INTERVAL))?;

    let volume = &scene.volume;
    let hello = ServerMessage::Hello {
        dims: volume.dims(),
        spacing: volume.spacing().into(),
        histogram: volume.histogram(options.histogram_bins)?.counts,
        presets: bundled_presets(),
        width: options.width,
        height: options.height,
    };
    send_json(&mut ws, &hello)?;

    let mut state = SessionState::new(scene);
    send_frame(&mut ws, &mut state, &options)?;
    loop {
        // Rendering and message handling alternate on this thread; anything
        // that arrived during the last render is coalesced here.
        let wait = state.pending().is_none();
        if let Pump::Closed = pump(&mut ws, &mut state, wait)? {
            return Ok(());
        }
        match state.apply_pending() {
            Ok(true) => send_frame(&mut ws, &mut state, &options)?,
            Ok(false) => {}
            Err(e) => send_error(&mut ws, format!("update rejected: {e}"))?,
        }
    }
}
