//! Binary weight checkpoints.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic   8 bytes  "RISQNET1"
//! in      u32      input dimension
//! hidden  u32      hidden units per layer
//! out     u32      output dimension
//! count   u64      number of f64 values that follow
//! values  f64 × count, tensor order: input.w, input.b, lstm1.{wx,wh,b},
//!         lstm2.{wx,wh,b}, output.w, output.b
//! ```

use std::io::{Read, Write};

use super::network::QNetwork;
use crate::{Error, Result};

pub const MAGIC: &[u8; 8] = b"RISQNET1";

pub fn write_checkpoint<W: Write>(mut w: W, net: &QNetwork) -> Result<()> {
    w.write_all(MAGIC)?;
    for d in [net.in_dim(), net.hidden(), net.out_dim()] {
        w.write_all(&(d as u32).to_le_bytes())?;
    }
    let params = net.params();
    w.write_all(&(params.len() as u64).to_le_bytes())?;
    for v in params {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<QNetwork> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let mut dims = [0usize; 3];
    for d in &mut dims {
        let mut b = [0u8; 4];
        r.read_exact(&mut b)?;
        *d = u32::from_le_bytes(b) as usize;
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let count = u64::from_le_bytes(b8) as usize;
    let mut net = QNetwork::zeros(dims[0], dims[1], dims[2]);
    if count != net.param_count() {
        return Err(Error::Checkpoint(format!("expected {} values, header says {count}", net.param_count())));
    }
    let mut params = Vec::with_capacity(count);
    for _ in 0..count {
        r.read_exact(&mut b8)?;
        params.push(f64::from_le_bytes(b8));
    }
    net.set_params(&params)?;
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let mut rng = crate::rng_from_seed(8);
        let net = QNetwork::new(19, 4, &mut rng);
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &net).unwrap();
        assert_eq!(&buf[..8], MAGIC);
        assert_eq!(read_checkpoint(buf.as_slice()).unwrap(), net);
    }

    #[test]
    fn corrupt_rejected() {
        let mut rng = crate::rng_from_seed(8);
        let net = QNetwork::new(2, 2, &mut rng);
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &net).unwrap();
        buf[0] = b'X';
        assert!(read_checkpoint(buf.as_slice()).is_err());
        let mut short = Vec::new();
        write_checkpoint(&mut short, &net).unwrap();
        short.truncate(40);
        assert!(read_checkpoint(short.as_slice()).is_err());
    }
}
