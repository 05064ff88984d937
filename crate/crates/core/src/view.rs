//! The 13-cell window a robot perceives: its own node and every node within
//! two hops, including the four diagonals.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{Configuration, Occupancy};
use crate::grid::{Color, Coord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ViewError {
    #[error("no robot at {0}")]
    NoRobot(Coord),
    #[error("malformed view: {0}")]
    Malformed(&'static str),
}

/// What a robot perceives at one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellView {
    Nonexistent,
    Vacant,
    Occupied(Color),
}

impl CellView {
    pub fn exists(self) -> bool {
        self != CellView::Nonexistent
    }

    pub fn missing(self) -> bool {
        self == CellView::Nonexistent
    }

    pub fn vacant(self) -> bool {
        self == CellView::Vacant
    }

    pub fn occupied(self) -> bool {
        matches!(self, CellView::Occupied(_))
    }

    pub fn is(self, color: Color) -> bool {
        self == CellView::Occupied(color)
    }

    pub fn color(self) -> Option<Color> {
        match self {
            CellView::Occupied(c) => Some(c),
            _ => None,
        }
    }
}

/// Named cells of the window. `l`/`r`/`u`/`d` are left, right, up and down;
/// the digit is the hop count. Diagonals are named by compass direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct View {
    pub here: CellView,
    pub l1: CellView,
    pub l2: CellView,
    pub r1: CellView,
    pub r2: CellView,
    pub u1: CellView,
    pub u2: CellView,
    pub d1: CellView,
    pub d2: CellView,
    pub nw: CellView,
    pub ne: CellView,
    pub sw: CellView,
    pub se: CellView,
}

/// Cell offsets `(di, dj)` in the same order as [`View::cells`].
pub const WINDOW: [(i32, i32); 13] = [
    (0, 0),
    (0, -1),
    (0, -2),
    (0, 1),
    (0, 2),
    (-1, 0),
    (-2, 0),
    (1, 0),
    (2, 0),
    (-1, -1),
    (-1, 1),
    (1, -1),
    (1, 1),
];

impl View {
    pub fn from_cells(c: [CellView; 13]) -> Self {
        View {
            here: c[0],
            l1: c[1],
            l2: c[2],
            r1: c[3],
            r2: c[4],
            u1: c[5],
            u2: c[6],
            d1: c[7],
            d2: c[8],
            nw: c[9],
            ne: c[10],
            sw: c[11],
            se: c[12],
        }
    }

    pub fn cells(&self) -> [CellView; 13] {
        [
            self.here, self.l1, self.l2, self.r1, self.r2, self.u1, self.u2, self.d1, self.d2,
            self.nw, self.ne, self.sw, self.se,
        ]
    }

    /// Color of the observing robot.
    pub fn own_color(&self) -> Option<Color> {
        self.here.color()
    }

    /// Checks that the view could have come from a grid with at least two
    /// rows and two columns.
    pub fn validate(&self) -> Result<(), ViewError> {
        use ViewError::Malformed;
        if !self.here.occupied() {
            return Err(Malformed("own cell is not occupied"));
        }
        let pairs = [
            (self.l1, self.l2, "l2 exists without l1"),
            (self.r1, self.r2, "r2 exists without r1"),
            (self.u1, self.u2, "u2 exists without u1"),
            (self.d1, self.d2, "d2 exists without d1"),
        ];
        for (near, far, msg) in pairs {
            if far.exists() && near.missing() {
                return Err(Malformed(msg));
            }
        }
        let diagonals = [
            (self.nw, self.u1, self.l1, "nw inconsistent with u1/l1"),
            (self.ne, self.u1, self.r1, "ne inconsistent with u1/r1"),
            (self.sw, self.d1, self.l1, "sw inconsistent with d1/l1"),
            (self.se, self.d1, self.r1, "se inconsistent with d1/r1"),
        ];
        for (diag, vert, horiz, msg) in diagonals {
            if diag.exists() != (vert.exists() && horiz.exists()) {
                return Err(Malformed(msg));
            }
        }
        if self.l1.missing() && self.r1.missing() {
            return Err(Malformed("grid has a single column"));
        }
        if self.u1.missing() && self.d1.missing() {
            return Err(Malformed("grid has a single row"));
        }
        Ok(())
    }
}

impl Occupancy {
    /// Window around `at`; `at` must hold a robot.
    pub fn view_at(&self, at: Coord) -> Result<View, ViewError> {
        let dims = self.dims();
        if !dims.contains(at) || self.get(at).is_none() {
            return Err(ViewError::NoRobot(at));
        }
        let cells = WINDOW.map(|(di, dj)| match dims.offset(at, di, dj) {
            None => CellView::Nonexistent,
            Some(c) => match self.get(c) {
                None => CellView::Vacant,
                Some(col) => CellView::Occupied(col),
            },
        });
        Ok(View::from_cells(cells))
    }
}

/// The window a robot at `at` perceives in `config`.
pub fn extract_view(config: &Configuration, at: Coord) -> Result<View, ViewError> {
    config.occupancy().view_at(at)
}
