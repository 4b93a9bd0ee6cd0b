//! Element families, degree-of-freedom maps and finite element functions.

mod bubble;
mod clement;
mod function;
mod map;
mod reference;
mod space;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::mesh::Shape;

pub use bubble::{
    edge_bubble, edge_map, element_bubble, element_bubble_gradient, extend_from_edge,
    reference_edge_bubble, reference_element_bubble, EdgeMap,
};
pub use clement::{clement_interpolate, ClementSpace};
pub use function::{FeFunction, SolutionDocument};
pub use map::ElementMap;
pub use reference::{
    inside_reference, moment_weight, reference_edge_point, reference_vertices, DofSpec,
    DofTopology, Functional, ReferenceElement,
};
pub use space::FeSpace;

/// Supported element families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Conforming linear triangles.
    P1,
    P2,
    P3,
    /// Conforming bilinear rectangles.
    Q1,
    Q2,
    Q3,
    /// Crouzeix-Raviart triangles with edge-mean dofs.
    Cr1,
    /// Rectangles with `span{1, x, y, xy, y^2}`, `y` along the stretching direction.
    Cr2,
    /// Rectangles with `P2` and six dofs.
    Cr3,
}

impl Family {
    pub const ALL: &'static [Family] = &[
        Family::P1,
        Family::P2,
        Family::P3,
        Family::Q1,
        Family::Q2,
        Family::Q3,
        Family::Cr1,
        Family::Cr2,
        Family::Cr3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::P1 => "p1",
            Family::P2 => "p2",
            Family::P3 => "p3",
            Family::Q1 => "q1",
            Family::Q2 => "q2",
            Family::Q3 => "q3",
            Family::Cr1 => "cr1",
            Family::Cr2 => "cr2",
            Family::Cr3 => "cr3",
        }
    }

    pub fn shape(self) -> Shape {
        match self {
            Family::P1 | Family::P2 | Family::P3 | Family::Cr1 => Shape::Triangle,
            _ => Shape::Rectangle,
        }
    }

    /// Polynomial degree: total degree on triangles, per-variable degree on
    /// rectangles.
    pub fn degree(self) -> usize {
        match self {
            Family::P1 | Family::Q1 | Family::Cr1 => 1,
            Family::P2 | Family::Q2 | Family::Cr2 | Family::Cr3 => 2,
            Family::P3 | Family::Q3 => 3,
        }
    }

    pub fn is_conforming(self) -> bool {
        !matches!(self, Family::Cr1 | Family::Cr2 | Family::Cr3)
    }

    /// Degree of the continuous conduit space paired with this family.
    pub fn conduit_degree(self) -> usize {
        if self.is_conforming() {
            self.degree()
        } else {
            1
        }
    }

    pub fn local_dofs(self) -> usize {
        match self {
            Family::P1 | Family::Cr1 => 3,
            Family::P2 | Family::Cr3 => 6,
            Family::P3 => 10,
            Family::Q1 => 4,
            Family::Cr2 => 5,
            Family::Q2 => 9,
            Family::Q3 => 16,
        }
    }

    /// Default quadrature degree for bilinear forms.
    pub fn quadrature_degree(self) -> usize {
        2 * self.degree() + 2
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    /// Accepts the short names (`p1`, `cr2`, ...) and long tags such as
    /// `CR2-rect-Q1plus`; only the part before the first `-` matters.
    fn from_str(s: &str) -> Result<Self, Error> {
        let head = s.split('-').next().unwrap_or("").to_ascii_lowercase();
        Family::ALL
            .iter()
            .copied()
            .find(|f| f.name() == head)
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_tags() {
        assert_eq!("CR2-rect-Q1plus".parse::<Family>().unwrap(), Family::Cr2);
        assert_eq!("p1".parse::<Family>().unwrap(), Family::P1);
        assert!(matches!("q7".parse::<Family>(), Err(Error::UnknownFamily(_))));
    }
}
