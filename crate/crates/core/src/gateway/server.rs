// SPDX-License-Identifier: Apache-2.0

//! TCP front end: one thread per client session.

use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::Arc;
use std::thread;

use super::protocol::{respond, BAD_REQUEST};
use super::Gateway;

/// Serves requests from `reader` until it is exhausted, one response per line.
pub fn handle_session<R: BufRead, W: Write>(gw: &Gateway, mut reader: R, mut writer: W) -> io::Result<()> {
    let mut buf = Vec::new();
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            return Ok(());
        }
        if buf.last() == Some(&b'\n') {
            buf.pop();
        }
        let reply = match std::str::from_utf8(&buf) {
            Ok(line) => respond(gw, line),
            Err(_) => BAD_REQUEST.to_string(),
        };
        writer.write_all(reply.as_bytes())?;
        writer.write_all(b"\n")?;
        writer.flush()?;
    }
}

#[derive(Debug)]
pub struct Server {
    listener: TcpListener,
    gateway: Arc<Gateway>,
}

impl Server {
    pub fn bind(addr: impl ToSocketAddrs, gateway: Arc<Gateway>) -> io::Result<Server> {
        Ok(Server {
            listener: TcpListener::bind(addr)?,
            gateway,
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Accepts clients forever.
    pub fn run(self) -> io::Result<()> {
        for stream in self.listener.incoming() {
            let stream = match stream {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("accept: {e}");
                    continue;
                }
            };
            let gw = Arc::clone(&self.gateway);
            thread::spawn(move || {
                if let Err(e) = session(&gw, stream) {
                    eprintln!("session: {e}");
                }
            });
        }
        Ok(())
    }

    /// Runs the accept loop on a background thread.
    pub fn spawn(self) -> thread::JoinHandle<io::Result<()>> {
        thread::spawn(move || self.run())
    }
}

fn session(gw: &Gateway, stream: TcpStream) -> io::Result<()> {
    // One short line each way per request; do not wait to coalesce.
    stream.set_nodelay(true)?;
    let reader = BufReader::new(stream.try_clone()?);
    handle_session(gw, reader, BufWriter::new(stream))
}

/// Sends one request and returns the response line without its newline.
pub fn query(addr: impl ToSocketAddrs, request: &str) -> io::Result<String> {
    let mut stream = TcpStream::connect(addr)?;
    stream.set_nodelay(true)?;
    stream.write_all(request.as_bytes())?;
    stream.write_all(b"\n")?;
    stream.flush()?;
    let mut line = String::new();
    BufReader::new(stream).read_line(&mut line)?;
    if !line.ends_with('\n') {
        return Err(io::Error::new(
            io::ErrorKind::UnexpectedEof,
            "connection closed before a response",
        ));
    }
    line.pop();
    Ok(line)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::BeaconDirectory;

    #[test]
    fn session_over_buffers() {
        let gw = Gateway::new(BeaconDirectory::parse("BEACON b \"hall\"\n").unwrap());
        let input = b"BEACON b\nBEACON c\r\n\xff\nnope";
        let mut out = Vec::new();
        handle_session(&gw, &input[..], &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "OK desc=\"hall\"\nERR NOT_FOUND\nERR BAD_REQUEST\nERR BAD_REQUEST\n"
        );
    }

    #[test]
    fn tcp_round_trip() {
        let gw = Arc::new(Gateway::new(BeaconDirectory::default()));
        let server = Server::bind("127.0.0.1:0", gw).unwrap();
        let addr = server.local_addr().unwrap();
        server.spawn();
        assert_eq!(query(addr, "STATE nobody").unwrap(), "ERR NOT_FOUND");
        assert_eq!(query(addr, "HELLO").unwrap(), "ERR BAD_REQUEST");
    }
}
