//! Starts the frame-streaming server and drives one session with a
//! scripted WebSocket client. Pass `--listen PORT` to keep serving for a
//! browser viewer instead.
//!
//! cargo run --release --example serve_session
//! cargo run --release --example serve_session -- --listen 8080

use std::net::TcpStream;

use tungstenite::Message;
use volren::service::{serve, ServeOptions, Server};
use volren::{io, synth, Scene};

fn main() -> volren::Result<()> {
    let tf = io::bundled_preset("soft-tissue").expect("bundled preset").into_tf();
    let scene = Scene::framed(synth::head_phantom(64), tf)?;
    let options = ServeOptions {
        width: 128,
        height: 128,
        ..ServeOptions::default()
    };

    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.first().map(String::as_str) == Some("--listen") {
        let port = args.get(1).and_then(|p| p.parse().ok()).unwrap_or(8080);
        println!("serving on ws://0.0.0.0:{port}/");
        return serve(scene, port, options);
    }

    let (addr, _server) = Server::bind("127.0.0.1:0", scene, options)?.spawn()?;
    let stream = TcpStream::connect(addr)?;
    let (mut ws, _) = tungstenite::client(format!("ws://{addr}/"), stream).expect("handshake");

    let read_text = |ws: &mut tungstenite::WebSocket<TcpStream>| match ws.read().expect("read") {
        Message::Text(t) => serde_json::from_str::<serde_json::Value>(&t).expect("json"),
        other => panic!("unexpected {other:?}"),
    };
    let hello = read_text(&mut ws);
    println!("hello: dims {} presets {}", hello["dims"], hello["presets"].as_array().map_or(0, |p| p.len()));

    let updates = [
        r#"{"type":"update"}"#,
        r#"{"type":"update","config":{"mode":"mip"}}"#,
        r#"{"type":"update","camera":{"position":[80,20,80]}}"#,
        r#"{"type":"update","tf":{"points":[{"scalar":0,"color":[0,0,0],"opacity":0},{"scalar":1,"color":[1,0.4,0.2],"opacity":1}]}}"#,
        r#"{not json"#,
    ];
    // The first frame arrives unprompted. Each valid update yields one more
    // frame; the malformed one yields an error reply.
    for (i, update) in std::iter::once(None).chain(updates.iter().map(Some)).enumerate() {
        if let Some(u) = update {
            ws.send(Message::text(*u)).expect("send");
        }
        let msg = read_text(&mut ws);
        if msg["type"] == "frame" {
            let Message::Binary(png) = ws.read().expect("read") else { panic!("expected PNG") };
            println!("step {i}: frame seq {} ({} byte PNG, {:.1} ms)", msg["seq"], png.len(), msg["stats"]["frame_ms"].as_f64().unwrap_or(0.0));
        } else {
            println!("step {i}: {msg}");
        }
    }
    Ok(())
}
