//! Two-party sessions. Each party runs on its own thread behind an
//! [`Endpoint`] that enforces strict alternation and logs every frame it
//! sends into the shared transcript.

use std::io::{BufReader, BufWriter};
use std::net::{TcpListener, TcpStream};
use std::sync::mpsc::{channel, Receiver, Sender};
use std::sync::{Arc, Mutex};

use super::frame::{Frame, Tag};
use super::transcript::{Direction, Entry, Transcript};
use super::ProtocolError;

/// First payload byte of a control frame that ends the protocol.
pub const CONTROL_ABORT: u8 = 0xff;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Client,
    Server,
}

impl Role {
    fn direction(self) -> Direction {
        match self {
            Role::Client => Direction::ClientToServer,
            Role::Server => Direction::ServerToClient,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Channel {
    #[default]
    InProcess,
    /// Loopback TCP; port 0 picks an ephemeral port.
    Tcp { host: String, port: u16 },
}

impl Channel {
    pub fn tcp_loopback() -> Self {
        Channel::Tcp { host: "127.0.0.1".into(), port: 0 }
    }
}

trait Transport: Send {
    fn send(&mut self, f: &Frame) -> Result<(), ProtocolError>;
    fn recv(&mut self) -> Result<Frame, ProtocolError>;
}

struct MpscTransport {
    tx: Sender<Vec<u8>>,
    rx: Receiver<Vec<u8>>,
}

impl Transport for MpscTransport {
    fn send(&mut self, f: &Frame) -> Result<(), ProtocolError> {
        self.tx.send(f.encode()).map_err(|_| ProtocolError::Disconnected)
    }

    fn recv(&mut self) -> Result<Frame, ProtocolError> {
        let bytes = self.rx.recv().map_err(|_| ProtocolError::Disconnected)?;
        Frame::decode(&bytes)
    }
}

struct TcpTransport {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
}

impl TcpTransport {
    fn new(stream: TcpStream) -> Result<Self, ProtocolError> {
        stream.set_nodelay(true)?;
        Ok(Self { reader: BufReader::new(stream.try_clone()?), writer: BufWriter::new(stream) })
    }
}

impl Transport for TcpTransport {
    fn send(&mut self, f: &Frame) -> Result<(), ProtocolError> {
        f.write_to(&mut self.writer)
    }

    fn recv(&mut self) -> Result<Frame, ProtocolError> {
        Frame::read_from(&mut self.reader)
    }
}

pub struct Endpoint {
    role: Role,
    transport: Box<dyn Transport>,
    transcript: Arc<Mutex<Transcript>>,
    my_turn: bool,
}

impl Endpoint {
    fn new(role: Role, transport: Box<dyn Transport>, transcript: Arc<Mutex<Transcript>>) -> Self {
        Self { role, transport, transcript, my_turn: role == Role::Client }
    }

    /// Connected in-process pair sharing one transcript.
    pub fn in_process_pair() -> (Endpoint, Endpoint, Arc<Mutex<Transcript>>) {
        let (tx_c, rx_s) = channel();
        let (tx_s, rx_c) = channel();
        let t = Arc::new(Mutex::new(Transcript::default()));
        let c = Endpoint::new(Role::Client, Box::new(MpscTransport { tx: tx_c, rx: rx_c }), t.clone());
        let s = Endpoint::new(Role::Server, Box::new(MpscTransport { tx: tx_s, rx: rx_s }), t.clone());
        (c, s, t)
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn send(&mut self, step: &str, tag: Tag, payload: Vec<u8>) -> Result<(), ProtocolError> {
        if !self.my_turn {
            return Err(ProtocolError::Alternation(format!("{:?} sent {step} while awaiting the peer", self.role)));
        }
        let frame = Frame::new(tag, payload);
        self.transcript.lock().expect("transcript lock").push(Entry {
            direction: self.role.direction(),
            step: step.to_string(),
            bytes: frame.wire_len(),
            tag: tag as u8,
        });
        self.my_turn = false;
        self.transport.send(&frame)
    }

    pub fn send_abort(&mut self, step: &str) -> Result<(), ProtocolError> {
        self.send(step, Tag::Control, vec![CONTROL_ABORT])
    }

    /// Next frame of any tag.
    pub fn recv(&mut self) -> Result<Frame, ProtocolError> {
        if self.my_turn {
            return Err(ProtocolError::Alternation(format!("{:?} waited for a frame on its own turn", self.role)));
        }
        let f = self.transport.recv()?;
        self.my_turn = true;
        Ok(f)
    }

    /// Next frame, which must carry `tag`; an abort from the peer surfaces as
    /// [`ProtocolError::Aborted`].
    pub fn recv_tag(&mut self, step: &str, tag: Tag) -> Result<Vec<u8>, ProtocolError> {
        let f = self.recv()?;
        if is_abort(&f) {
            return Err(ProtocolError::Aborted);
        }
        if f.tag != tag {
            return Err(ProtocolError::UnexpectedTag {
                step: step.to_string(),
                expected: tag.name(),
                got: f.tag.name(),
            });
        }
        Ok(f.payload)
    }

    pub fn transcript(&self) -> Transcript {
        self.transcript.lock().expect("transcript lock").clone()
    }
}

pub fn is_abort(f: &Frame) -> bool {
    f.tag == Tag::Control && f.payload.first() == Some(&CONTROL_ABORT)
}

#[derive(Debug)]
pub struct SessionResult<C, S> {
    pub client: Result<C, ProtocolError>,
    pub server: Result<S, ProtocolError>,
    pub transcript: Transcript,
}

/// Runs both parties to completion on two threads. An endpoint is dropped
/// when its party returns, so a peer blocked on it sees a disconnect.
pub fn run_session<C, S, FC, FS>(
    channel: &Channel,
    client: FC,
    server: FS,
) -> Result<SessionResult<C, S>, ProtocolError>
where
    C: Send,
    S: Send,
    FC: FnOnce(&mut Endpoint) -> Result<C, ProtocolError> + Send,
    FS: FnOnce(&mut Endpoint) -> Result<S, ProtocolError> + Send,
{
    let transcript = Arc::new(Mutex::new(Transcript::default()));
    let (client_res, server_res) = match channel {
        Channel::InProcess => {
            let (tx_c, rx_s) = channel_pair();
            let (tx_s, rx_c) = channel_pair();
            let mut ce =
                Endpoint::new(Role::Client, Box::new(MpscTransport { tx: tx_c, rx: rx_c }), transcript.clone());
            let mut se =
                Endpoint::new(Role::Server, Box::new(MpscTransport { tx: tx_s, rx: rx_s }), transcript.clone());
            std::thread::scope(|sc| {
                let hs = sc.spawn(move || server(&mut se));
                let hc = sc.spawn(move || client(&mut ce));
                (join(hc), join(hs))
            })
        }
        Channel::Tcp { host, port } => {
            let listener = TcpListener::bind((host.as_str(), *port))?;
            let addr = listener.local_addr()?;
            let ts = transcript.clone();
            let tc = transcript.clone();
            std::thread::scope(|sc| {
                let hs = sc.spawn(move || {
                    let (stream, _) = listener.accept()?;
                    let mut se = Endpoint::new(Role::Server, Box::new(TcpTransport::new(stream)?), ts);
                    server(&mut se)
                });
                let hc = sc.spawn(move || {
                    let stream = TcpStream::connect(addr)?;
                    let mut ce = Endpoint::new(Role::Client, Box::new(TcpTransport::new(stream)?), tc);
                    client(&mut ce)
                });
                (join(hc), join(hs))
            })
        }
    };
    let transcript = transcript.lock().expect("transcript lock").clone();
    Ok(SessionResult { client: client_res, server: server_res, transcript })
}

fn channel_pair() -> (Sender<Vec<u8>>, Receiver<Vec<u8>>) {
    channel()
}

fn join<T>(h: std::thread::ScopedJoinHandle<'_, T>) -> T {
    match h.join() {
        Ok(v) => v,
        Err(p) => std::panic::resume_unwind(p),
    }
}
