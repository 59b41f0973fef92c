//! Little-endian binary files for networks and association tables.
//!
//! Network file:
//!
//! ```text
//! magic "GWRN" | version u32 | dim u32 | neurons u64 | edges u64
//! params: epochs u32, max_age u32, max_neurons u64, eps_b, eps_n, tau_b, tau_n, a_T, h_T (f64)
//! seed u64 | epochs_done u64 | revision u64 | label (u32 length + UTF-8)
//! weights f64 x neurons*dim | habituation f64 x neurons | edges (u32 a, u32 b, u32 age)
//! ```
//!
//! Table file:
//!
//! ```text
//! magic "HEBB" | version u32 | side A | side B | alpha f64 | entries u64
//! side: label (u32 length + UTF-8), neurons u64, revision u64
//! entries: (u64 index_a, u64 index_b, f64 weight)
//! ```

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use visuomotor_core::gwr::Edge;
use visuomotor_core::{AssociationTable, GwrNetwork, GwrParams, MapSide};

use crate::FormatError;

const NET_MAGIC: &[u8; 4] = b"GWRN";
const TABLE_MAGIC: &[u8; 4] = b"HEBB";
const VERSION: u32 = 1;

struct Writer<W: Write>(W);

impl<W: Write> Writer<W> {
    fn u32(&mut self, v: u32) -> io::Result<()> {
        self.0.write_all(&v.to_le_bytes())
    }
    fn u64(&mut self, v: u64) -> io::Result<()> {
        self.0.write_all(&v.to_le_bytes())
    }
    fn f64(&mut self, v: f64) -> io::Result<()> {
        self.0.write_all(&v.to_le_bytes())
    }
    fn str(&mut self, s: &str) -> io::Result<()> {
        self.u32(s.len() as u32)?;
        self.0.write_all(s.as_bytes())
    }
}

struct Reader<R: Read>(R);

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N], FormatError> {
        let mut buf = [0u8; N];
        self.0.read_exact(&mut buf).map_err(|_| FormatError::Truncated)?;
        Ok(buf)
    }
    fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }
    fn u64(&mut self) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
    fn usize(&mut self) -> Result<usize, FormatError> {
        usize::try_from(self.u64()?).map_err(|_| FormatError::Corrupt("count exceeds address space"))
    }
    fn f64(&mut self) -> Result<f64, FormatError> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
    fn str(&mut self) -> Result<String, FormatError> {
        let n = self.u32()? as usize;
        let mut buf = vec![0u8; n];
        self.0.read_exact(&mut buf).map_err(|_| FormatError::Truncated)?;
        String::from_utf8(buf).map_err(|_| FormatError::Corrupt("label is not UTF-8"))
    }
    fn header(&mut self, magic: &[u8; 4]) -> Result<(), FormatError> {
        if &self.bytes::<4>()? != magic {
            return Err(FormatError::BadMagic);
        }
        match self.u32()? {
            VERSION => Ok(()),
            v => Err(FormatError::Version(v)),
        }
    }
    fn finish(mut self) -> Result<(), FormatError> {
        let mut rest = [0u8; 1];
        match self.0.read(&mut rest)? {
            0 => Ok(()),
            _ => Err(FormatError::Corrupt("trailing bytes")),
        }
    }
}

pub fn write_network<W: Write>(net: &GwrNetwork, out: W) -> Result<(), FormatError> {
    let mut w = Writer(out);
    let edges = net.edges();
    w.0.write_all(NET_MAGIC)?;
    w.u32(VERSION)?;
    w.u32(net.dim() as u32)?;
    w.u64(net.len() as u64)?;
    w.u64(edges.len() as u64)?;
    let p = net.params();
    w.u32(p.epochs)?;
    w.u32(p.max_age)?;
    w.u64(p.max_neurons as u64)?;
    for v in [p.eps_b, p.eps_n, p.tau_b, p.tau_n, p.activity_threshold, p.habituation_threshold] {
        w.f64(v)?;
    }
    w.u64(net.seed())?;
    w.u64(net.epochs_done())?;
    w.u64(net.revision())?;
    w.str(net.label())?;
    for &v in net.weights() {
        w.f64(v)?;
    }
    for &v in net.habituations() {
        w.f64(v)?;
    }
    for e in edges {
        w.u32(e.a as u32)?;
        w.u32(e.b as u32)?;
        w.u32(e.age)?;
    }
    w.0.flush()?;
    Ok(())
}

pub fn read_network<R: Read>(input: R) -> Result<GwrNetwork, FormatError> {
    let mut r = Reader(input);
    r.header(NET_MAGIC)?;
    let dim = r.u32()? as usize;
    let n = r.usize()?;
    let n_edges = r.usize()?;
    let epochs = r.u32()?;
    let max_age = r.u32()?;
    let max_neurons = r.usize()?;
    let mut f = [0.0; 6];
    for v in &mut f {
        *v = r.f64()?;
    }
    let params = GwrParams {
        epochs,
        max_age,
        max_neurons,
        eps_b: f[0],
        eps_n: f[1],
        tau_b: f[2],
        tau_n: f[3],
        activity_threshold: f[4],
        habituation_threshold: f[5],
    };
    let seed = r.u64()?;
    let epochs_done = r.u64()?;
    let revision = r.u64()?;
    let label = r.str()?;
    let len = n.checked_mul(dim).ok_or(FormatError::Corrupt("weight count overflows"))?;
    let weights = (0..len).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
    let habituation = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
    let edges = (0..n_edges)
        .map(|_| Ok(Edge { a: r.u32()? as usize, b: r.u32()? as usize, age: r.u32()? }))
        .collect::<Result<Vec<_>, FormatError>>()?;
    r.finish()?;
    Ok(GwrNetwork::from_parts(label, dim, params, seed, epochs_done, revision, weights, habituation, &edges)?)
}

fn write_side<W: Write>(w: &mut Writer<W>, side: &MapSide) -> io::Result<()> {
    w.str(&side.label)?;
    w.u64(side.len as u64)?;
    w.u64(side.revision)
}

fn read_side<R: Read>(r: &mut Reader<R>) -> Result<MapSide, FormatError> {
    Ok(MapSide { label: r.str()?, len: r.usize()?, revision: r.u64()? })
}

pub fn write_table<W: Write>(table: &AssociationTable, out: W) -> Result<(), FormatError> {
    let mut w = Writer(out);
    w.0.write_all(TABLE_MAGIC)?;
    w.u32(VERSION)?;
    write_side(&mut w, table.side(visuomotor_core::Side::A))?;
    write_side(&mut w, table.side(visuomotor_core::Side::B))?;
    w.f64(table.alpha())?;
    w.u64(table.len() as u64)?;
    for (a, b, v) in table.entries() {
        w.u64(a as u64)?;
        w.u64(b as u64)?;
        w.f64(v)?;
    }
    w.0.flush()?;
    Ok(())
}

pub fn read_table<R: Read>(input: R) -> Result<AssociationTable, FormatError> {
    let mut r = Reader(input);
    r.header(TABLE_MAGIC)?;
    let a = read_side(&mut r)?;
    let b = read_side(&mut r)?;
    let alpha = r.f64()?;
    let n = r.usize()?;
    let entries = (0..n).map(|_| Ok((r.usize()?, r.usize()?, r.f64()?))).collect::<Result<Vec<_>, FormatError>>()?;
    r.finish()?;
    Ok(AssociationTable::from_entries(a, b, alpha, &entries)?)
}

pub fn save_network(net: &GwrNetwork, path: &Path) -> Result<(), FormatError> {
    let mut buf = Vec::new();
    write_network(net, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_network(path: &Path) -> Result<GwrNetwork, FormatError> {
    read_network(io::Cursor::new(fs::read(path)?))
}

pub fn save_table(table: &AssociationTable, path: &Path) -> Result<(), FormatError> {
    let mut buf = Vec::new();
    write_table(table, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_table(path: &Path) -> Result<AssociationTable, FormatError> {
    read_table(io::Cursor::new(fs::read(path)?))
}
