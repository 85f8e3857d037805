//! The variable store and the data stack of scoped regions.
//!
//! Regions are created by `p = new int[n] => G` and freed in LIFO order when
//! `G` finishes. Handles carry `(id, generation)`; an access through a handle
//! whose region is gone is reported as a dangling fault instead of reading
//! stale memory.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::ast::{ElemType, Handle, Name, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum RegionFault {
    #[error("dangling handle #{}@{}", .0.region, .0.generation)]
    Dangling(Handle),
    #[error("index {index} out of bounds for region #{region} of length {len}")]
    Bounds { region: u64, index: i64, len: usize },
    #[error("negative region length {0}")]
    NegativeLength(i64),
    #[error("handle variable is read-only inside its scope")]
    ReadOnlyHandle,
}

/// θ: one binding per variable name.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Store {
    bindings: BTreeMap<Name, Value>,
}

impl Store {
    pub fn new() -> Store {
        Store::default()
    }

    /// Binds `x` to `v`, replacing any previous binding.
    pub fn assign(&mut self, x: &str, v: Value) {
        self.bindings.insert(x.to_string(), v);
    }

    pub fn read(&self, x: &str) -> Option<&Value> {
        self.bindings.get(x)
    }

    pub fn remove(&mut self, x: &str) -> Option<Value> {
        self.bindings.remove(x)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Value)> {
        self.bindings.iter()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }
}

impl<const N: usize> From<[(&str, Value); N]> for Store {
    fn from(pairs: [(&str, Value); N]) -> Store {
        let mut s = Store::new();
        for (k, v) in pairs {
            s.assign(k, v);
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    pub id: u64,
    pub generation: u64,
    pub elem: ElemType,
    pub cells: Vec<Value>,
    pub live: bool,
}

impl Region {
    pub fn handle(&self) -> Handle {
        Handle {
            region: self.id,
            generation: self.generation,
        }
    }
}

/// Metadata kept for a freed region.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RetiredRegion {
    pub id: u64,
    pub generation: u64,
    pub elem: ElemType,
    pub len: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionEvent {
    Alloc(u64),
    Free(u64),
}

/// LIFO stack of live regions.
///
/// Ids increase strictly over a run. The generation of a region is the
/// number of regions that occupied the same stack depth before it.
#[derive(Clone, Debug, Default)]
pub struct RegionStack {
    live: Vec<Region>,
    retired: Vec<RetiredRegion>,
    depth_generations: Vec<u64>,
    next_id: u64,
    log: Vec<RegionEvent>,
}

impl RegionStack {
    pub fn new() -> RegionStack {
        RegionStack::default()
    }

    pub fn alloc(&mut self, elem: ElemType, len: i64) -> Result<Handle, RegionFault> {
        if len < 0 {
            return Err(RegionFault::NegativeLength(len));
        }
        let depth = self.live.len();
        if self.depth_generations.len() <= depth {
            self.depth_generations.resize(depth + 1, 0);
        }
        let region = Region {
            id: self.next_id,
            generation: self.depth_generations[depth],
            elem,
            cells: vec![elem.zero(); len as usize],
            live: true,
        };
        self.next_id += 1;
        self.log.push(RegionEvent::Alloc(region.id));
        let h = region.handle();
        self.live.push(region);
        Ok(h)
    }

    /// Frees the top region. Panics if `h` is not the top.
    pub fn free(&mut self, h: Handle) {
        let top = self.live.pop().expect("free on an empty region stack");
        assert_eq!(top.handle(), h, "regions must be freed in LIFO order");
        let depth = self.live.len();
        self.depth_generations[depth] += 1;
        self.log.push(RegionEvent::Free(top.id));
        self.retired.push(RetiredRegion {
            id: top.id,
            generation: top.generation,
            elem: top.elem,
            len: top.cells.len(),
        });
    }

    fn find(&self, h: Handle) -> Result<&Region, RegionFault> {
        // live ids are sorted ascending
        match self.live.binary_search_by_key(&h.region, |r| r.id) {
            Ok(i) if self.live[i].generation == h.generation => Ok(&self.live[i]),
            _ => Err(RegionFault::Dangling(h)),
        }
    }

    fn find_mut(&mut self, h: Handle) -> Result<&mut Region, RegionFault> {
        match self.live.binary_search_by_key(&h.region, |r| r.id) {
            Ok(i) if self.live[i].generation == h.generation => Ok(&mut self.live[i]),
            _ => Err(RegionFault::Dangling(h)),
        }
    }

    pub fn is_live(&self, h: Handle) -> bool {
        self.find(h).is_ok()
    }

    pub fn check(&self, h: Handle) -> Result<(), RegionFault> {
        self.find(h).map(|_| ())
    }

    pub fn read(&self, h: Handle, index: i64) -> Result<&Value, RegionFault> {
        let r = self.find(h)?;
        usize::try_from(index)
            .ok()
            .and_then(|i| r.cells.get(i))
            .ok_or(RegionFault::Bounds {
                region: r.id,
                index,
                len: r.cells.len(),
            })
    }

    /// Writes one cell. The caller checks the element type.
    pub fn write(&mut self, h: Handle, index: i64, v: Value) -> Result<(), RegionFault> {
        let r = self.find_mut(h)?;
        let len = r.cells.len();
        let region = r.id;
        let cell = usize::try_from(index)
            .ok()
            .and_then(|i| r.cells.get_mut(i))
            .ok_or(RegionFault::Bounds { region, index, len })?;
        *cell = v;
        Ok(())
    }

    pub fn elem_type(&self, h: Handle) -> Result<ElemType, RegionFault> {
        self.find(h).map(|r| r.elem)
    }

    pub fn live(&self) -> &[Region] {
        &self.live
    }

    pub fn retired(&self) -> &[RetiredRegion] {
        &self.retired
    }

    pub fn live_count(&self) -> usize {
        self.live.len()
    }

    pub fn log(&self) -> &[RegionEvent] {
        &self.log
    }

    /// One line per region ever allocated: `id gen type length live`.
    pub fn table(&self) -> String {
        let mut rows: Vec<(u64, String)> = self
            .retired
            .iter()
            .map(|r| {
                (
                    r.id,
                    format!(
                        "{} {} {} {} false",
                        r.id,
                        r.generation,
                        r.elem.keyword(),
                        r.len
                    ),
                )
            })
            .collect();
        rows.extend(self.live.iter().map(|r| {
            (
                r.id,
                format!(
                    "{} {} {} {} true",
                    r.id,
                    r.generation,
                    r.elem.keyword(),
                    r.cells.len()
                ),
            )
        }));
        rows.sort_by_key(|(id, _)| *id);
        let mut out = String::new();
        for (_, line) in rows {
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for Store {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.bindings {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}
