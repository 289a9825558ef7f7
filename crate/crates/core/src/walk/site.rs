use std::fmt;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

pub const MIN_DIM: usize = 3;
pub const MAX_DIM: usize = 8;

/// A lattice point of Z^d.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct Site(Vec<i64>);

impl Site {
    pub fn new(coords: Vec<i64>) -> Result<Self> {
        check_dim(coords.len())?;
        Ok(Site(coords))
    }

    pub fn origin(d: usize) -> Self {
        Site(vec![0; d])
    }

    /// `sign · e_axis`.
    pub fn unit(d: usize, axis: usize, sign: i64) -> Self {
        let mut c = vec![0; d];
        c[axis] = sign.signum();
        Site(c)
    }

    pub fn axis(d: usize, k: i64) -> Self {
        let mut c = vec![0; d];
        c[0] = k;
        Site(c)
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_origin(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn l1(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|&c| (c * c) as f64).sum::<f64>().sqrt()
    }

    pub fn offset(&self, by: &Site) -> Site {
        Site(self.0.iter().zip(&by.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

pub(crate) fn check_dim(d: usize) -> Result<()> {
    if !(MIN_DIM..=MAX_DIM).contains(&d) {
        return Err(Error::config(format!(
            "dimension d = {d} must satisfy {MIN_DIM} <= d <= {MAX_DIM} (the walk must be transient)"
        )));
    }
    Ok(())
}

/// Packs a site into a `u128`, `128 / d` bits per coordinate with a bias, so
/// a unit step is a single wrapping add.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SiteCodec {
    d: usize,
    bits: u32,
    deltas: [u128; 2 * MAX_DIM],
}

impl SiteCodec {
    pub fn new(d: usize) -> Result<Self> {
        check_dim(d)?;
        let bits = 128 / d as u32;
        let mut deltas = [0u128; 2 * MAX_DIM];
        for axis in 0..d {
            let one = 1u128 << (axis as u32 * bits);
            deltas[2 * axis] = one;
            deltas[2 * axis + 1] = one.wrapping_neg();
        }
        Ok(Self { d, bits, deltas })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Largest coordinate magnitude that can be encoded.
    pub fn coord_limit(&self) -> u64 {
        (1u64 << (self.bits - 1)) - 1
    }

    fn bias(&self) -> u128 {
        1u128 << (self.bits - 1)
    }

    fn mask(&self) -> u128 {
        (1u128 << self.bits) - 1
    }

    pub fn origin(&self) -> u128 {
        let b = self.bias();
        (0..self.d).fold(0, |acc, i| acc | (b << (i as u32 * self.bits)))
    }

    pub fn encode(&self, site: &Site) -> Result<u128> {
        if site.dim() != self.d {
            return Err(Error::input(format!(
                "site has {} coordinates, expected {}",
                site.dim(),
                self.d
            )));
        }
        let limit = self.coord_limit() as i64;
        let mut key = 0u128;
        for (i, &c) in site.coords().iter().enumerate() {
            if c.abs() > limit {
                return Err(Error::input(format!("coordinate {c} exceeds the encodable range ±{limit}")));
            }
            key |= ((c as i128 + self.bias() as i128) as u128) << (i as u32 * self.bits);
        }
        Ok(key)
    }

    pub fn decode(&self, key: u128) -> Site {
        let mut coords = Vec::with_capacity(self.d);
        for i in 0..self.d {
            let raw = (key >> (i as u32 * self.bits)) & self.mask();
            coords.push((raw as i128 - self.bias() as i128) as i64);
        }
        Site(coords)
    }

    /// Direction index `2·axis` is `+e_axis`, `2·axis + 1` is `−e_axis`.
    #[inline(always)]
    pub fn step(&self, key: u128, dir: usize) -> u128 {
        key.wrapping_add(self.deltas[dir])
    }
}

/// An ordered list of visited sites, stored packed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    codec: SiteCodec,
    keys: Vec<u128>,
}

impl Path {
    pub fn new(codec: SiteCodec) -> Self {
        Self { codec, keys: Vec::new() }
    }

    pub fn from_keys(codec: SiteCodec, keys: Vec<u128>) -> Self {
        Self { codec, keys }
    }

    pub fn from_sites(sites: &[Site]) -> Result<Self> {
        let d = sites
            .first()
            .ok_or_else(|| Error::input("a path needs at least one site"))?
            .dim();
        let codec = SiteCodec::new(d)?;
        let keys = sites.iter().map(|s| codec.encode(s)).collect::<Result<Vec<_>>>()?;
        let path = Self { codec, keys };
        path.check_nearest_neighbour()?;
        Ok(path)
    }

    fn check_nearest_neighbour(&self) -> Result<()> {
        for (i, w) in self.keys.windows(2).enumerate() {
            let (a, b) = (self.codec.decode(w[0]), self.codec.decode(w[1]));
            let dist: i64 = a.coords().iter().zip(b.coords()).map(|(x, y)| (x - y).abs()).sum();
            if dist != 1 {
                return Err(Error::input(format!(
                    "path positions {i} and {} are not nearest neighbours",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    pub fn codec(&self) -> &SiteCodec {
        &self.codec
    }

    pub fn keys(&self) -> &[u128] {
        &self.keys
    }

    pub fn into_keys(self) -> Vec<u128> {
        self.keys
    }

    pub(crate) fn keys_mut(&mut self) -> &mut Vec<u128> {
        &mut self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn site(&self, i: usize) -> Site {
        self.codec.decode(self.keys[i])
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        self.keys.iter().map(|&k| self.codec.decode(k))
    }

    /// One site per line, coordinates separated by single spaces.
    pub fn dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for s in self.sites() {
            writeln!(out, "{s}")?;
        }
        Ok(())
    }

    pub fn parse<R: BufRead>(input: R) -> Result<Self> {
        let mut sites = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let coords = line
                .split_whitespace()
                .map(|t| t.parse::<i64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::input(format!("path line {}: {e}", lineno + 1)))?;
            if let Some(first) = sites.first() {
                let first: &Site = first;
                if first.dim() != coords.len() {
                    return Err(Error::input(format!(
                        "path line {} has {} coordinates, expected {}",
                        lineno + 1,
                        coords.len(),
                        first.dim()
                    )));
                }
            }
            sites.push(Site::new(coords)?);
        }
        Self::from_sites(&sites)
    }
}
