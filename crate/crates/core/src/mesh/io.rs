//! Plain-text mesh and connectivity files.
//!
//! Mesh file: block count on the first line; then per block a line
//! `ni nj nk` followed by all x, all y and all z node coordinates in
//! i-fastest order, whitespace separated.
//!
//! Connectivity file: one line per connection,
//! `blockA faceA blockB faceB orientation`, faces numbered 0..6 as
//! i-min, i-max, j-min, j-max, k-min, k-max. Non-interblock faces are listed
//! as `bc block face wall|farfield`. Lines starting with `#` are comments.

use std::fmt::Write as _;
use std::path::Path;

use super::block::{Connection, Face, FaceRef, FaceTag, Orientation, StructuredBlock};
use super::MultiBlockMesh;
use crate::error::{Error, Result};

pub fn format_mesh(mesh: &MultiBlockMesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}", mesh.blocks.len());
    for blk in &mesh.blocks {
        let _ = writeln!(s, "{} {} {}", blk.dims[0], blk.dims[1], blk.dims[2]);
        for c in 0..3 {
            for (n, p) in blk.coords.iter().enumerate() {
                let sep = if n + 1 == blk.coords.len() || (n + 1) % 6 == 0 { "\n" } else { " " };
                let _ = write!(s, "{:.17e}{sep}", p[c]);
            }
        }
    }
    s
}

pub fn format_connectivity(mesh: &MultiBlockMesh) -> String {
    let mut s = String::from("# blockA faceA blockB faceB orientation | bc block face tag\n");
    for c in &mesh.topology.connections {
        let _ = writeln!(s, "{} {} {} {} {}", c.a.block, c.a.face.index(), c.b.block, c.b.face.index(), c.orientation.0);
    }
    for (b, tags) in mesh.topology.tags.iter().enumerate() {
        for (f, tag) in tags.iter().enumerate() {
            match tag {
                FaceTag::Wall => {
                    let _ = writeln!(s, "bc {b} {f} wall");
                }
                FaceTag::Farfield => {
                    let _ = writeln!(s, "bc {b} {f} farfield");
                }
                FaceTag::Interblock => {}
            }
        }
    }
    s
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, what: &str) -> Result<T> {
    tok.ok_or_else(|| Error::Parse(format!("missing {what}")))?
        .parse()
        .map_err(|_| Error::Parse(format!("bad {what}")))
}

pub fn parse_blocks(text: &str) -> Result<Vec<StructuredBlock>> {
    let mut tok = text.split_whitespace();
    let nblocks: usize = parse_num(tok.next(), "block count")?;
    let mut blocks = Vec::with_capacity(nblocks);
    for _ in 0..nblocks {
        let dims = [
            parse_num(tok.next(), "ni")?,
            parse_num(tok.next(), "nj")?,
            parse_num(tok.next(), "nk")?,
        ];
        let n: usize = dims[0] * dims[1] * dims[2];
        let mut coords = vec![[0.0; 3]; n];
        for c in 0..3 {
            for p in coords.iter_mut() {
                p[c] = parse_num(tok.next(), "coordinate")?;
            }
        }
        blocks.push(StructuredBlock::new(dims, coords)?);
    }
    if tok.next().is_some() {
        return Err(Error::Parse("trailing data after last block".into()));
    }
    Ok(blocks)
}

pub fn parse_connectivity(text: &str, nblocks: usize) -> Result<(Vec<Connection>, Vec<[FaceTag; 6]>)> {
    let mut connections = Vec::new();
    let mut tags = vec![[FaceTag::Interblock; 6]; nblocks];
    let face = |v: usize| Face::from_index(v).ok_or_else(|| Error::Parse(format!("face {v} outside 0..6")));
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tok = line.split_whitespace();
        if line.starts_with("bc") {
            tok.next();
            let b: usize = parse_num(tok.next(), "block")?;
            let f = face(parse_num(tok.next(), "face")?)?;
            let tag = match tok.next() {
                Some("wall") => FaceTag::Wall,
                Some("farfield") => FaceTag::Farfield,
                other => return Err(Error::Parse(format!("unknown boundary tag {other:?}"))),
            };
            *tags
                .get_mut(b)
                .ok_or_else(|| Error::Parse(format!("block {b} out of range")))?
                .get_mut(f.index())
                .expect("face index") = tag;
        } else {
            let ab: usize = parse_num(tok.next(), "blockA")?;
            let af = face(parse_num(tok.next(), "faceA")?)?;
            let bb: usize = parse_num(tok.next(), "blockB")?;
            let bf = face(parse_num(tok.next(), "faceB")?)?;
            let o = Orientation::new(parse_num(tok.next(), "orientation")?)?;
            connections.push(Connection { a: FaceRef { block: ab, face: af }, b: FaceRef { block: bb, face: bf }, orientation: o });
        }
    }
    Ok((connections, tags))
}

pub fn write_mesh(mesh: &MultiBlockMesh, mesh_path: &Path, connectivity_path: &Path) -> Result<()> {
    std::fs::write(mesh_path, format_mesh(mesh))?;
    std::fs::write(connectivity_path, format_connectivity(mesh))?;
    Ok(())
}

pub fn read_mesh(mesh_path: &Path, connectivity_path: &Path) -> Result<MultiBlockMesh> {
    let blocks = parse_blocks(&std::fs::read_to_string(mesh_path)?)?;
    let (connections, tags) = parse_connectivity(&std::fs::read_to_string(connectivity_path)?, blocks.len())?;
    MultiBlockMesh::new(blocks, connections, tags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::cartesian_block;

    #[test]
    fn two_block_roundtrip() {
        let a = cartesian_block([0.0; 3], [1.0, 1.0, 1.0], [2, 3, 2]);
        let b = cartesian_block([1.0, 0.0, 0.0], [2.0, 1.0, 1.0], [2, 3, 2]);
        let mut ta = [FaceTag::Farfield; 6];
        ta[1] = FaceTag::Interblock;
        let mut tb = [FaceTag::Wall; 6];
        tb[0] = FaceTag::Interblock;
        let conn = Connection {
            a: FaceRef { block: 0, face: Face::IMax },
            b: FaceRef { block: 1, face: Face::IMin },
            orientation: Orientation::ALIGNED,
        };
        let mesh = MultiBlockMesh::new(vec![a, b], vec![conn], vec![ta, tb]).unwrap();
        let blocks = parse_blocks(&format_mesh(&mesh)).unwrap();
        let (c, t) = parse_connectivity(&format_connectivity(&mesh), 2).unwrap();
        let back = MultiBlockMesh::new(blocks, c, t).unwrap();
        assert_eq!(back, mesh);
    }

    #[test]
    fn rejects_truncated_file() {
        assert!(parse_blocks("1\n2 2 2\n0 1 2").is_err());
    }
}
