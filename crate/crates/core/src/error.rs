use thiserror::Error;

/// Every failure the library reports. Caps are environmental limits; the
/// rest are violated preconditions on the inputs.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Composition or pairing of maps whose endpoints do not line up.
    #[error("domain mismatch in {context}: expected size {expected}, found {found}")]
    DomainMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    /// A table entry points outside its codomain, or sizes disagree.
    #[error("malformed {what}: {detail}")]
    Malformed { what: &'static str, detail: String },

    /// The operation needs a surjection and did not get one.
    #[error("map is not an epimorphism: element {missing} of the codomain has empty fiber")]
    NotEpi { missing: usize },

    /// A multiplication table fails one of the group axioms.
    #[error("not a group: {reason}")]
    NotAGroup { reason: String },

    /// An enumeration bound was hit. The dimension is named so callers can
    /// raise the right cap.
    #[error("cap exceeded: {what} is {actual}, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        actual: usize,
        cap: usize,
    },

    /// Groupoid comparison over a fixed object set got different object sets.
    #[error("object mismatch: groupoids have {left} and {right} objects")]
    ObjectMismatch { left: usize, right: usize },

    /// The groupoid was not built as a group action on a set.
    #[error("not an action groupoid: {detail}")]
    NotActionGroupoid { detail: String },

    /// The given element set is not a subgroup (or fiberwise subgroup family).
    #[error("not a subgroup: {detail}")]
    NotASubgroup { detail: String },

    /// A section assigned a group element outside the fiber it must live in.
    #[error("fiber mismatch: element {element} of the carrier got a group element for fiber {got}, needs {needs}")]
    FiberMismatch {
        element: usize,
        got: usize,
        needs: usize,
    },

    /// Cover projections whose vertex/edge counts disagree with the graphs.
    #[error("size mismatch in {context}: expected {expected}, found {found}")]
    SizeMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    /// The covers operation needs a connected graph.
    #[error("{which} graph must be connected")]
    ConnectednessRequired { which: &'static str },

    /// Intermediate covers exist only under a Galois cover.
    #[error("cover is not Galois: {detail}")]
    NotGalois { detail: String },

    /// The modulus has a repeated root in the splitting field.
    #[error("extension is not separable: {detail}")]
    NotSeparable { detail: String },

    /// The polynomial offered as a modulus is reducible or not monic.
    #[error("bad modulus: {detail}")]
    BadModulus { detail: String },
}

impl Error {
    /// Convenience constructor for `Malformed`.
    pub(crate) fn malformed(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Malformed {
            what,
            detail: detail.into(),
        }
    }
}
