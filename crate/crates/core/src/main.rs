use std::io::{self, Write};
use std::process::ExitCode;

/// Stdout that goes quiet once the reading end of a pipe has closed.
struct Quiet<W> {
    inner: W,
    closed: bool,
}

impl<W: Write> Write for Quiet<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        if self.closed {
            return Ok(buf.len());
        }
        match self.inner.write(buf) {
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => {
                self.closed = true;
                Ok(buf.len())
            }
            other => other,
        }
    }

    fn flush(&mut self) -> io::Result<()> {
        match self.inner.flush() {
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
            other => other,
        }
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let mut out = Quiet { inner: io::BufWriter::new(io::stdout().lock()), closed: false };
    let mut err = io::stderr().lock();
    let code = ridemodel::cli::run_command(&args, &mut out, &mut err);
    let _ = out.flush();
    ExitCode::from(code as u8)
}
