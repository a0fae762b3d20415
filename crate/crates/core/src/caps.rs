//! Enumeration bounds. Everything in this crate terminates; caps decide how
//! long you are willing to wait and how much memory a table may take.

use crate::Error;

/// Bounds for the enumerative operations. All overridable; the defaults are
/// sized for interactive use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Caps {
    /// Largest carrier set a map-level operation will sweep.
    pub max_set_size: usize,
    /// Largest group order materialized as a Cayley table.
    pub max_group_order: usize,
    /// Largest permutation-closure order before giving up.
    pub max_closure_order: usize,
    /// Largest fiber for splitting-structure enumeration.
    pub max_fiber_size: usize,
    /// Largest arrow count for wide-subgroupoid enumeration.
    pub max_arrows: usize,
    /// Largest node count for congruence and quotient lattices.
    pub max_lattice_nodes: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_set_size: 12,
            max_group_order: 24,
            max_closure_order: 5040,
            max_fiber_size: 8,
            max_arrows: 256,
            max_lattice_nodes: 5040,
        }
    }
}

impl Caps {
    pub(crate) fn check(&self, what: &'static str, actual: usize, cap: usize) -> crate::Result<()> {
        if actual > cap {
            Err(Error::CapExceeded { what, actual, cap })
        } else {
            Ok(())
        }
    }

    pub(crate) fn set_size(&self, actual: usize) -> crate::Result<()> {
        self.check("set size", actual, self.max_set_size)
    }

    pub(crate) fn group_order(&self, actual: usize) -> crate::Result<()> {
        self.check("group order", actual, self.max_group_order)
    }

    pub(crate) fn closure_order(&self, actual: usize) -> crate::Result<()> {
        self.check("closure order", actual, self.max_closure_order)
    }

    pub(crate) fn fiber_size(&self, actual: usize) -> crate::Result<()> {
        self.check("fiber size", actual, self.max_fiber_size)
    }

    pub(crate) fn arrows(&self, actual: usize) -> crate::Result<()> {
        self.check("arrow count", actual, self.max_arrows)
    }

    pub(crate) fn lattice_nodes(&self, actual: usize) -> crate::Result<()> {
        self.check("lattice node count", actual, self.max_lattice_nodes)
    }

    /// Parse the `GALOISFORGE_CAPS` environment format: comma-separated
    /// `key=value` with keys `set_size`, `group_order`, `closure`, `fiber`,
    /// `arrows`, `lattice`. Unknown keys are errors; missing keys keep
    /// defaults.
    pub fn from_env_str(s: &str) -> crate::Result<Self> {
        let mut caps = Caps::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part.split_once('=').ok_or_else(|| {
                Error::malformed("caps string", format!("`{part}` is not key=value"))
            })?;
            let value: usize = value.trim().parse().map_err(|_| {
                Error::malformed("caps string", format!("`{value}` is not a number"))
            })?;
            match key.trim() {
                "set_size" => caps.max_set_size = value,
                "group_order" => caps.max_group_order = value,
                "closure" => caps.max_closure_order = value,
                "fiber" => caps.max_fiber_size = value,
                "arrows" => caps.max_arrows = value,
                "lattice" => caps.max_lattice_nodes = value,
                other => {
                    return Err(Error::malformed(
                        "caps string",
                        format!("unknown cap `{other}`"),
                    ))
                }
            }
        }
        Ok(caps)
    }
}
