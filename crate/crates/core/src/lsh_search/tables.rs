use std::ops::Range;

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::minmax_hash::SignatureSet;

/// One table: signature value to a slice of `members`.
#[derive(Debug, Default)]
pub struct Table {
    buckets: FxHashMap<u64, (u32, u32)>,
    members: Vec<u32>,
}

impl Table {
    pub fn bucket(&self, sig: u64) -> &[u32] {
        match self.buckets.get(&sig) {
            Some(&(start, len)) => &self.members[start as usize..(start + len) as usize],
            None => &[],
        }
    }

    pub fn bucket_sizes(&self) -> impl Iterator<Item = u32> + '_ {
        self.buckets.values().map(|&(_, len)| len)
    }

    pub fn bucket_count(&self) -> usize {
        self.buckets.len()
    }

    pub fn entry_count(&self) -> usize {
        self.members.len()
    }
}

/// Tables populated with one partition of the signature set. Bucket members are global
/// fingerprint positions in ascending order.
#[derive(Debug)]
pub struct HashTables {
    pub range: Range<usize>,
    tables: Vec<Table>,
}

impl HashTables {
    pub fn table(&self, i: usize) -> &Table {
        &self.tables[i]
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    pub fn entry_count(&self) -> usize {
        self.tables.iter().map(Table::entry_count).sum()
    }

    pub fn bucket_sizes(&self) -> Vec<u32> {
        self.tables.iter().flat_map(Table::bucket_sizes).collect()
    }
}

/// Builds the tables for `range`, skipping fingerprints for which `skip` returns true.
pub fn build_tables_filtered(sigs: &SignatureSet, range: Range<usize>, skip: impl Fn(usize) -> bool + Sync) -> HashTables {
    assert!(range.end <= sigs.len(), "partition {range:?} outside {} signatures", sigs.len());
    let tables = (0..sigs.tables)
        .into_par_iter()
        .map(|t| {
            let mut pairs: Vec<(u64, u32)> =
                range.clone().filter(|&i| !skip(i)).map(|i| (sigs.get(i)[t], i as u32)).collect();
            pairs.sort_unstable();
            let mut buckets = FxHashMap::default();
            let mut members = Vec::with_capacity(pairs.len());
            let mut start = 0;
            while start < pairs.len() {
                let sig = pairs[start].0;
                let mut end = start;
                while end < pairs.len() && pairs[end].0 == sig {
                    members.push(pairs[end].1);
                    end += 1;
                }
                buckets.insert(sig, (start as u32, (end - start) as u32));
                start = end;
            }
            Table { buckets, members }
        })
        .collect();
    HashTables { range, tables }
}

pub fn build_tables(sigs: &SignatureSet, range: Range<usize>) -> HashTables {
    build_tables_filtered(sigs, range, |_| false)
}
