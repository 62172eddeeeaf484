//! Interactive sessions: each WebSocket connection owns a scene, applies the
//! viewer's steering messages and streams rendered frames back.

mod protocol;
mod server;
mod session;

pub use protocol::{CameraUpdate, ClientMessage, ConfigUpdate, ServerMessage, TfUpdate, Update};
pub use server::{serve, ServeOptions, Server};
pub use session::SessionState;
