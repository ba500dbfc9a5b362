//! Finite groups given by multiplication tables, with the subgroup and coset
//! combinatorics the rest of the crate consumes.
//!
//! Element `0` is always the identity. Dihedral groups `D2q:q` of order `2q`
//! store `b^i` at index `i` and `a b^i` at index `q + i`, where `a` is a
//! reflection and `b` a rotation, and are generated by `[a, b]`.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest group order the constructors accept.
pub const ORDER_BOUND: usize = 200;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupKind {
    Dihedral(usize),
    Cyclic(usize),
    Symmetric(usize),
    Product,
    Table,
    Quotient,
}

/// One conjugacy class of subgroups.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgroupClass {
    /// Lexicographically least sorted element set in the class.
    pub representative: Vec<usize>,
    pub order: usize,
    pub is_cyclic: bool,
    /// Number of conjugates.
    pub class_size: usize,
    pub label: String,
}

impl SubgroupClass {
    pub fn is_normal(&self) -> bool {
        self.class_size == 1
    }
}

/// Membership bitset used as a hash key for subgroups.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize, elements: &[usize]) -> Self {
        let mut b = vec![0u64; n.div_ceil(64)];
        for &e in elements {
            b[e / 64] |= 1 << (e % 64);
        }
        Bits(b)
    }
}

pub struct Group {
    descriptor: String,
    kind: GroupKind,
    order: usize,
    mul: Vec<u16>,
    inv: Vec<usize>,
    generators: Vec<usize>,
    element_order: Vec<usize>,
    element_classes: Vec<Vec<usize>>,
    element_class_of: Vec<usize>,
    subgroup_classes: Vec<SubgroupClass>,
    subgroup_lookup: HashMap<Bits, usize>,
}

impl fmt::Debug for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Group({}, order {})", self.descriptor, self.order)
    }
}

impl PartialEq for Group {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.mul == other.mul && self.generators == other.generators
    }
}

impl Group {
    /// Parses a descriptor: `D2q:15`, `C:6`, `S:4`, `prod(D2q:3,C:2)` or `table:<path>`.
    pub fn from_descriptor(desc: &str) -> Result<Arc<Group>> {
        let d = desc.trim();
        let bad = |why: &str| Error::Descriptor(d.to_string(), why.to_string());
        let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad("expected a positive integer"));
        if let Some(rest) = d.strip_prefix("D2q:") {
            Group::dihedral(num(rest)?)
        } else if let Some(rest) = d.strip_prefix("C:") {
            Group::cyclic(num(rest)?)
        } else if let Some(rest) = d.strip_prefix("S:") {
            Group::symmetric(num(rest)?)
        } else if let Some(path) = d.strip_prefix("table:") {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io(path.to_string(), e))?;
            let rows: Vec<Vec<usize>> = serde_json::from_str(&text)?;
            Group::from_table(rows, d)
        } else if let Some(inner) = d.strip_prefix("prod(").and_then(|s| s.strip_suffix(')')) {
            let mut depth = 0usize;
            let mut split = None;
            for (i, c) in inner.char_indices() {
                match c {
                    '(' => depth += 1,
                    ')' => depth = depth.checked_sub(1).ok_or_else(|| bad("unbalanced parentheses"))?,
                    ',' if depth == 0 => {
                        split = Some(i);
                        break;
                    }
                    _ => {}
                }
            }
            let i = split.ok_or_else(|| bad("prod needs two factors"))?;
            let a = Group::from_descriptor(&inner[..i])?;
            let b = Group::from_descriptor(&inner[i + 1..])?;
            Group::product(&a, &b)
        } else {
            Err(bad("unknown group family"))
        }
    }

    /// The dihedral group of order `2q`, `<a, b | a^2 = b^q = (ab)^2 = 1>`.
    pub fn dihedral(q: usize) -> Result<Arc<Group>> {
        if q == 0 {
            return Err(Error::Descriptor(format!("D2q:{q}"), "q must be positive".into()));
        }
        check_order(2 * q)?;
        let n = 2 * q;
        let table = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| {
                        let (s, i) = (x / q, x % q);
                        let (t, j) = (y / q, y % q);
                        let i = if t == 1 { (q - i) % q } else { i };
                        ((s + t) % 2) * q + (i + j) % q
                    })
                    .collect()
            })
            .collect();
        let gens = if q == 1 { vec![1] } else { vec![q, 1] };
        Group::build(format!("D2q:{q}"), GroupKind::Dihedral(q), table, Some(gens))
    }

    pub fn cyclic(n: usize) -> Result<Arc<Group>> {
        if n == 0 {
            return Err(Error::Descriptor("C:0".into(), "order must be positive".into()));
        }
        check_order(n)?;
        let table = (0..n).map(|x| (0..n).map(|y| (x + y) % n).collect()).collect();
        let gens = if n == 1 { vec![] } else { vec![1] };
        Group::build(format!("C:{n}"), GroupKind::Cyclic(n), table, Some(gens))
    }

    /// Symmetric group on `n <= 5` points; elements in lexicographic order,
    /// product `(st)(x) = s(t(x))`.
    pub fn symmetric(n: usize) -> Result<Arc<Group>> {
        if n == 0 || n > 5 {
            return Err(Error::Descriptor(format!("S:{n}"), "supported for 1 <= n <= 5".into()));
        }
        let mut perms: Vec<Vec<usize>> = Vec::new();
        let mut p: Vec<usize> = (0..n).collect();
        loop {
            perms.push(p.clone());
            // next permutation in lexicographic order
            let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| p[i] < p[i + 1]) else { break };
            let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).expect("successor exists");
            p.swap(i, j);
            p[i + 1..].reverse();
        }
        let index: HashMap<Vec<usize>, usize> = perms.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        let table = perms
            .iter()
            .map(|s| perms.iter().map(|t| index[&t.iter().map(|&x| s[x]).collect::<Vec<_>>()]).collect())
            .collect();
        let gens = if n == 1 {
            vec![]
        } else {
            let mut swap: Vec<usize> = (0..n).collect();
            swap.swap(0, 1);
            let cycle: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
            let mut g = vec![index[&swap]];
            if n > 2 {
                g.push(index[&cycle]);
            }
            g
        };
        Group::build(format!("S:{n}"), GroupKind::Symmetric(n), table, Some(gens))
    }

    /// Direct product; `(g, h)` is stored at `g * |H| + h`.
    pub fn product(a: &Group, b: &Group) -> Result<Arc<Group>> {
        let (m, k) = (a.order, b.order);
        check_order(m * k)?;
        let table =
            (0..m * k).map(|x| (0..m * k).map(|y| a.mul(x / k, y / k) * k + b.mul(x % k, y % k)).collect()).collect();
        let mut gens: Vec<usize> = a.generators.iter().map(|&g| g * k).collect();
        gens.extend(b.generators.iter().copied());
        Group::build(format!("prod({},{})", a.descriptor, b.descriptor), GroupKind::Product, table, Some(gens))
    }

    /// Group from an explicit multiplication table; the identity is relabelled to 0.
    pub fn from_table(rows: Vec<Vec<usize>>, descriptor: &str) -> Result<Arc<Group>> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::BadTable("empty table".into()));
        }
        check_order(n)?;
        if rows.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return Err(Error::BadTable("table must be square with entries below its size".into()));
        }
        let e = (0..n)
            .find(|&e| (0..n).all(|x| rows[e][x] == x && rows[x][e] == x))
            .ok_or_else(|| Error::BadTable("no identity element".into()))?;
        let relabel = |x: usize| {
            if x == e {
                0
            } else if x == 0 {
                e
            } else {
                x
            }
        };
        let table = (0..n).map(|x| (0..n).map(|y| relabel(rows[relabel(x)][relabel(y)])).collect()).collect();
        Group::build(descriptor.to_string(), GroupKind::Table, table, None)
    }

    fn build(
        descriptor: String,
        kind: GroupKind,
        table: Vec<Vec<usize>>,
        generators: Option<Vec<usize>>,
    ) -> Result<Arc<Group>> {
        let n = table.len();
        let mut mul = Vec::with_capacity(n * n);
        for row in &table {
            for &x in row {
                mul.push(x as u16);
            }
        }
        let m = |x: usize, y: usize| mul[x * n + y] as usize;
        if (0..n).any(|x| m(0, x) != x || m(x, 0) != x) {
            return Err(Error::BadTable("element 0 is not the identity".into()));
        }
        let mut inv = vec![usize::MAX; n];
        for (x, inv_x) in inv.iter_mut().enumerate() {
            let mut seen = vec![false; n];
            for y in 0..n {
                let z = m(x, y);
                if seen[z] {
                    return Err(Error::BadTable("rows are not permutations".into()));
                }
                seen[z] = true;
                if z == 0 {
                    *inv_x = y;
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                let xy = m(x, y);
                for z in 0..n {
                    if m(xy, z) != m(x, m(y, z)) {
                        return Err(Error::BadTable(format!("not associative at ({x},{y},{z})")));
                    }
                }
            }
        }
        let mut g = Group {
            descriptor,
            kind,
            order: n,
            mul,
            inv,
            generators: Vec::new(),
            element_order: Vec::new(),
            element_classes: Vec::new(),
            element_class_of: Vec::new(),
            subgroup_classes: Vec::new(),
            subgroup_lookup: HashMap::new(),
        };
        g.element_order = (0..n)
            .map(|x| {
                let (mut y, mut k) = (x, 1);
                while y != 0 {
                    y = g.mul(y, x);
                    k += 1;
                }
                k
            })
            .collect();
        g.generators = match generators {
            Some(gens) => {
                if g.closure(&gens).len() != n {
                    return Err(Error::BadTable("generators do not generate".into()));
                }
                gens
            }
            None => g.generating_set(&(0..n).collect::<Vec<_>>()),
        };
        g.compute_element_classes();
        g.compute_subgroup_classes();
        Ok(Arc::new(g))
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        0
    }

    #[inline]
    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.mul[x * self.order + y] as usize
    }

    #[inline]
    pub fn inv(&self, x: usize) -> usize {
        self.inv[x]
    }

    pub fn pow(&self, x: usize, k: usize) -> usize {
        (0..k).fold(0, |acc, _| self.mul(acc, x))
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn element_order(&self, x: usize) -> usize {
        self.element_order[x]
    }

    /// `q` when this is `D2q:q`.
    pub fn dihedral_q(&self) -> Option<usize> {
        match self.kind {
            GroupKind::Dihedral(q) => Some(q),
            _ => None,
        }
    }

    /// Conjugacy classes of elements, sorted by element order then least element.
    pub fn conjugacy_classes(&self) -> &[Vec<usize>] {
        &self.element_classes
    }

    pub fn class_of_element(&self, x: usize) -> usize {
        self.element_class_of[x]
    }

    pub fn subgroup_classes(&self) -> &[SubgroupClass] {
        &self.subgroup_classes
    }

    pub fn subgroup_class(&self, idx: usize) -> &SubgroupClass {
        &self.subgroup_classes[idx]
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.subgroup_classes.iter().position(|c| c.label == label)
    }

    /// Class index of an arbitrary subgroup, given as any list of its elements.
    pub fn class_of_subgroup(&self, elements: &[usize]) -> Option<usize> {
        self.subgroup_lookup.get(&Bits::new(self.order, elements)).copied()
    }

    /// Sorted subgroup generated by `gens`.
    pub fn closure(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.order];
        seen[0] = true;
        let mut out = vec![0];
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for &s in gens {
                let y = self.mul(x, s);
                if !seen[y] {
                    seen[y] = true;
                    out.push(y);
                    queue.push_back(y);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Small generating set of the subgroup with the given elements (greedy).
    pub fn generating_set(&self, elements: &[usize]) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut span = vec![0];
        let mut sorted = elements.to_vec();
        sorted.sort_unstable();
        // prefer elements of large order
        sorted.sort_by_key(|&x| std::cmp::Reverse(self.element_order[x]));
        for x in sorted {
            if span.binary_search(&x).is_err() {
                gens.push(x);
                span = self.closure(&gens);
            }
        }
        gens
    }

    /// `{ g s g^-1 : s in set }`, sorted.
    pub fn conjugate(&self, set: &[usize], g: usize) -> Vec<usize> {
        let gi = self.inv(g);
        let mut out: Vec<usize> = set.iter().map(|&s| self.mul(self.mul(g, s), gi)).collect();
        out.sort_unstable();
        out
    }

    pub fn is_normal(&self, set: &[usize]) -> bool {
        let mut s = set.to_vec();
        s.sort_unstable();
        self.generators.iter().all(|&g| self.conjugate(&s, g) == s)
    }

    /// Largest normal subgroup contained in `set`.
    pub fn normal_core(&self, set: &[usize]) -> Vec<usize> {
        let mut core: Vec<usize> = set.to_vec();
        core.sort_unstable();
        for g in 0..self.order {
            let c = self.conjugate(set, g);
            core.retain(|x| c.binary_search(x).is_ok());
        }
        core
    }

    fn compute_element_classes(&mut self) {
        let n = self.order;
        let mut done = vec![false; n];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for x in 0..n {
            if done[x] {
                continue;
            }
            let mut cls: Vec<usize> = (0..n).map(|g| self.mul(self.mul(g, x), self.inv(g))).collect();
            cls.sort_unstable();
            cls.dedup();
            for &y in &cls {
                done[y] = true;
            }
            classes.push(cls);
        }
        classes.sort_by_key(|c| (self.element_order[c[0]], c[0]));
        let mut class_of = vec![0; n];
        for (i, c) in classes.iter().enumerate() {
            for &y in c {
                class_of[y] = i;
            }
        }
        self.element_classes = classes;
        self.element_class_of = class_of;
    }

    fn compute_subgroup_classes(&mut self) {
        let n = self.order;
        // cyclic subgroups, each with one generator
        let mut cyclic: Vec<(usize, Vec<usize>)> = Vec::new();
        let mut seen: HashSet<Bits> = HashSet::new();
        for x in 0..n {
            let c = self.closure(&[x]);
            if seen.insert(Bits::new(n, &c)) {
                cyclic.push((x, c));
            }
        }
        let mut all: Vec<(Vec<usize>, Vec<usize>)> =
            cyclic.iter().map(|(x, c)| (if *x == 0 { vec![] } else { vec![*x] }, c.clone())).collect();
        let mut frontier: Vec<usize> = (0..all.len()).collect();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for &i in &frontier {
                for (x, _) in &cyclic {
                    if all[i].1.binary_search(x).is_ok() {
                        continue;
                    }
                    let mut gens = all[i].0.clone();
                    gens.push(*x);
                    let j = self.closure(&gens);
                    if seen.insert(Bits::new(n, &j)) {
                        all.push((gens, j));
                        next.push(all.len() - 1);
                    }
                }
            }
            frontier = next;
        }

        // bucket into conjugacy classes
        let mut class_of_subgroup: HashMap<Bits, usize> = HashMap::new();
        let mut raw: Vec<(Vec<usize>, usize, Vec<Bits>)> = Vec::new();
        for (_, h) in &all {
            if class_of_subgroup.contains_key(&Bits::new(n, h)) {
                continue;
            }
            let mut conjugates: Vec<Vec<usize>> = (0..n).map(|g| self.conjugate(h, g)).collect();
            conjugates.sort();
            conjugates.dedup();
            let keys: Vec<Bits> = conjugates.iter().map(|c| Bits::new(n, c)).collect();
            for k in &keys {
                class_of_subgroup.insert(k.clone(), usize::MAX);
            }
            raw.push((conjugates[0].clone(), conjugates.len(), keys));
        }

        let mut classes: Vec<(SubgroupClass, Vec<Bits>)> = raw
            .into_iter()
            .map(|(rep, size, keys)| {
                let order = rep.len();
                let is_cyclic = rep.iter().any(|&x| self.element_order[x] == order);
                let label = self.base_label(&rep, is_cyclic);
                (SubgroupClass { representative: rep, order, is_cyclic, class_size: size, label }, keys)
            })
            .collect();
        // disambiguate equal labels by representative order
        classes.sort_by(|a, b| {
            (a.0.order, &a.0.label, &a.0.representative).cmp(&(b.0.order, &b.0.label, &b.0.representative))
        });
        let mut counts: HashMap<String, usize> = HashMap::new();
        for (c, _) in &classes {
            *counts.entry(c.label.clone()).or_default() += 1;
        }
        let mut running: HashMap<String, usize> = HashMap::new();
        for (c, _) in classes.iter_mut() {
            if counts[&c.label] > 1 {
                let k = running.entry(c.label.clone()).or_default();
                *k += 1;
                c.label = format!("{}#{}", c.label, k);
            }
        }
        classes.sort_by(|a, b| (a.0.order, &a.0.label).cmp(&(b.0.order, &b.0.label)));
        let mut lookup = HashMap::new();
        for (i, (_, keys)) in classes.iter().enumerate() {
            for k in keys {
                lookup.insert(k.clone(), i);
            }
        }
        self.subgroup_classes = classes.into_iter().map(|(c, _)| c).collect();
        self.subgroup_lookup = lookup;
    }

    fn base_label(&self, rep: &[usize], is_cyclic: bool) -> String {
        let order = rep.len();
        if order == 1 {
            return "1".into();
        }
        if order == self.order {
            return "G".into();
        }
        if is_cyclic {
            return format!("C{order}");
        }
        if order == 4 {
            return "V4".into();
        }
        if order % 2 == 0 && order >= 6 {
            let m = order / 2;
            if let Some(&r) = rep.iter().find(|&&x| self.element_order[x] == m) {
                let rot = self.closure(&[r]);
                if rep.iter().all(|x| rot.binary_search(x).is_ok() || self.element_order[*x] == 2) {
                    return format!("D{order}");
                }
            }
        }
        format!("H{order}")
    }

    /// Double cosets `H g K`; representatives are the least element of each block.
    pub fn double_cosets(&self, h: &[usize], k: &[usize]) -> DoubleCosets {
        let mut block_of = vec![usize::MAX; self.order];
        let mut representatives = Vec::new();
        let mut block_sizes = Vec::new();
        for g in 0..self.order {
            if block_of[g] != usize::MAX {
                continue;
            }
            let mut size = 0;
            for &x in h {
                for &y in k {
                    let z = self.mul(self.mul(x, g), y);
                    if block_of[z] == usize::MAX {
                        block_of[z] = representatives.len();
                        size += 1;
                    }
                }
            }
            representatives.push(g);
            block_sizes.push(size);
        }
        DoubleCosets { representatives, block_sizes }
    }

    /// Whether the subgroup has a normal Sylow `p`-subgroup with cyclic quotient.
    pub fn is_p_hypo_elementary(&self, set: &[usize], p: u64) -> Result<bool> {
        if !crate::arith::is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let p = p as usize;
        let order = set.len();
        let mut pp = 1;
        while order % (pp * p) == 0 {
            pp *= p;
        }
        let is_p_power = |mut k: usize| {
            while k % p == 0 {
                k /= p;
            }
            k == 1
        };
        let sylow: Vec<usize> = set.iter().copied().filter(|&x| is_p_power(self.element_order[x])).collect();
        if sylow.len() != pp {
            return Ok(false);
        }
        // all p-elements form a subgroup iff the Sylow subgroup is normal (and unique)
        let mut sorted = sylow.clone();
        sorted.sort_unstable();
        if self.closure(&sylow) != sorted {
            return Ok(false);
        }
        let target = order / pp;
        Ok(set.iter().any(|&x| {
            let mut k = 1;
            let mut y = x;
            while sorted.binary_search(&y).is_err() {
                y = self.mul(y, x);
                k += 1;
            }
            k == target
        }))
    }
}

fn check_order(n: usize) -> Result<()> {
    if n > ORDER_BOUND {
        Err(Error::OrderTooLarge(n, ORDER_BOUND))
    } else {
        Ok(())
    }
}

/// Decomposition of the group into double cosets `H g K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoubleCosets {
    pub representatives: Vec<usize>,
    pub block_sizes: Vec<usize>,
}

/// Left cosets `gH`, enumerated by least element; coset 0 is `H` itself.
#[derive(Clone, Debug)]
pub struct CosetSpace {
    pub representatives: Vec<usize>,
    coset_of: Vec<usize>,
}

impl CosetSpace {
    pub fn new(g: &Group, h: &[usize]) -> Self {
        let mut coset_of = vec![usize::MAX; g.order()];
        let mut representatives = Vec::new();
        for x in 0..g.order() {
            if coset_of[x] != usize::MAX {
                continue;
            }
            for &y in h {
                coset_of[g.mul(x, y)] = representatives.len();
            }
            representatives.push(x);
        }
        CosetSpace { representatives, coset_of }
    }

    pub fn len(&self) -> usize {
        self.representatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representatives.is_empty()
    }

    pub fn coset_of(&self, x: usize) -> usize {
        self.coset_of[x]
    }

    /// Index of `g * (coset k)`.
    pub fn act(&self, g: &Group, x: usize, k: usize) -> usize {
        self.coset_of[g.mul(x, self.representatives[k])]
    }
}

/// `G -> G/N` together with the coset table.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub source: Arc<Group>,
    pub group: Arc<Group>,
    pub projection: Vec<usize>,
}

impl Quotient {
    /// Quotient by a normal subgroup given as its element list.
    pub fn new(g: &Arc<Group>, normal: &[usize]) -> Result<Quotient> {
        if !g.is_normal(normal) || g.closure(normal).len() != normal.len() {
            return Err(Error::NotNormal);
        }
        let cosets = CosetSpace::new(g, normal);
        let m = cosets.len();
        let table = (0..m)
            .map(|i| {
                (0..m).map(|j| cosets.coset_of(g.mul(cosets.representatives[i], cosets.representatives[j]))).collect()
            })
            .collect();
        let label = g.class_of_subgroup(normal).map(|c| g.subgroup_class(c).label.clone()).unwrap_or_default();
        let mut gens: Vec<usize> = g.generators().iter().map(|&x| cosets.coset_of(x)).filter(|&x| x != 0).collect();
        gens.dedup();
        let group = Group::build(format!("{}/{}", g.descriptor(), label), GroupKind::Quotient, table, Some(gens))?;
        let projection = (0..g.order()).map(|x| cosets.coset_of(x)).collect();
        Ok(Quotient { source: g.clone(), group, projection })
    }

    /// Full preimage of a set of quotient elements.
    pub fn preimage(&self, set: &[usize]) -> Vec<usize> {
        (0..self.source.order()).filter(|&x| set.contains(&self.projection[x])).collect()
    }

    /// For each subgroup class of the quotient, the class of its preimage.
    pub fn subgroup_correspondence(&self) -> Vec<usize> {
        self.group
            .subgroup_classes()
            .iter()
            .map(|c| {
                self.source
                    .class_of_subgroup(&self.preimage(&c.representative))
                    .expect("preimage of a subgroup is a subgroup")
            })
            .collect()
    }
}

/// An injective homomorphism `source -> target`.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub source: Arc<Group>,
    pub target: Arc<Group>,
    pub map: Vec<usize>,
}

impl Embedding {
    /// Extends generator images to a homomorphism and checks it is one and injective.
    pub fn from_generator_images(source: &Arc<Group>, target: &Arc<Group>, images: &[usize]) -> Result<Self> {
        let gens = source.generators();
        if gens.len() != images.len() {
            return Err(Error::GroupMismatch("one image per generator is required".into()));
        }
        let mut map = vec![usize::MAX; source.order()];
        map[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for (&s, &t) in gens.iter().zip(images) {
                let y = source.mul(x, s);
                let img = target.mul(map[x], t);
                if map[y] == usize::MAX {
                    map[y] = img;
                    queue.push_back(y);
                } else if map[y] != img {
                    return Err(Error::GroupMismatch("generator images do not define a homomorphism".into()));
                }
            }
        }
        let mut seen = map.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != map.len() {
            return Err(Error::GroupMismatch("homomorphism is not injective".into()));
        }
        Ok(Embedding { source: source.clone(), target: target.clone(), map })
    }

    pub fn image(&self, set: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = set.iter().map(|&x| self.map[x]).collect();
        out.sort_unstable();
        out
    }

    /// Source element mapping to `y`, if any.
    pub fn preimage_element(&self, y: usize) -> Option<usize> {
        self.map.iter().position(|&x| x == y)
    }
}
