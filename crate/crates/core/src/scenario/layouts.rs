//! The three shipped room layouts, 7 m x 6 m at 0.1 m per cell.
//!
//! Every layout has a 2.0 m x 0.8 m work table with the fixed arm beside its
//! short west edge, two or three closed containers and two open surfaces.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::world::{Cell, CellRect, FurnitureKind, Pose2D};

pub const WIDTH: u32 = 70;
pub const HEIGHT: u32 = 60;
pub const RESOLUTION: f64 = 0.1;

pub const TABLE_LENGTH: f64 = 2.0;
pub const TABLE_DEPTH: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    Kitchen,
    Bathroom,
    Bedroom,
}

impl Layout {
    pub const ALL: [Layout; 3] = [Layout::Kitchen, Layout::Bathroom, Layout::Bedroom];

    pub fn as_str(&self) -> &'static str {
        match self {
            Layout::Kitchen => "kitchen",
            Layout::Bathroom => "bathroom",
            Layout::Bedroom => "bedroom",
        }
    }

    pub(crate) fn def(&self) -> LayoutDef {
        match self {
            Layout::Kitchen => kitchen(),
            Layout::Bathroom => bathroom(),
            Layout::Bedroom => bedroom(),
        }
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Layout {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Layout::ALL
            .into_iter()
            .find(|l| l.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| format!("unknown layout `{s}`"))
    }
}

pub(crate) struct FurnitureDef {
    pub id: &'static str,
    pub kind: FurnitureKind,
    pub rect: CellRect,
    pub openable: bool,
    pub nav: Vec<Pose2D>,
    /// Object placement spots, each within the mobile arm's reach from a
    /// nav target.
    pub slots: Vec<(f64, f64)>,
}

pub(crate) struct LayoutDef {
    /// South-west corner of the work table.
    pub table_origin: (f64, f64),
    pub furniture: Vec<FurnitureDef>,
    pub obstacles: Vec<CellRect>,
    pub alice: Pose2D,
    pub david: Pose2D,
    pub distractor: (&'static str, &'static str),
}

fn rect(c0: u32, r0: u32, c1: u32, r1: u32) -> CellRect {
    CellRect::new(Cell::new(c0, r0), Cell::new(c1, r1))
}

fn p(x: f64, y: f64, theta: f64) -> Pose2D {
    Pose2D::new(x, y, theta)
}

fn furn(
    id: &'static str,
    kind: FurnitureKind,
    rect: CellRect,
    openable: bool,
    nav: Vec<Pose2D>,
    slots: Vec<(f64, f64)>,
) -> FurnitureDef {
    FurnitureDef {
        id,
        kind,
        rect,
        openable,
        nav,
        slots,
    }
}

fn kitchen() -> LayoutDef {
    use FurnitureKind::*;
    LayoutDef {
        table_origin: (1.0, 2.5),
        furniture: vec![
            furn(
                "fridge",
                Fridge,
                rect(62, 46, 69, 59),
                true,
                vec![p(5.95, 5.3, 0.0)],
                vec![(6.35, 5.1), (6.35, 5.5)],
            ),
            furn(
                "cabinet",
                Cabinet,
                rect(0, 50, 7, 59),
                true,
                vec![p(1.05, 5.5, PI)],
                vec![(0.55, 5.3), (0.55, 5.7)],
            ),
            furn(
                "microwave",
                Microwave,
                rect(64, 8, 69, 15),
                true,
                vec![p(6.15, 1.2, 0.0)],
                vec![(6.6, 1.1), (6.6, 1.3)],
            ),
            furn(
                "counter",
                Counter,
                rect(28, 54, 49, 59),
                false,
                vec![p(3.3, 5.2, FRAC_PI_2), p(4.5, 5.2, FRAC_PI_2)],
                vec![(3.3, 5.6), (4.5, 5.6), (3.9, 5.6)],
            ),
            furn(
                "dining_table",
                Table,
                rect(38, 10, 49, 17),
                false,
                vec![p(4.4, 0.8, FRAC_PI_2), p(4.4, 2.0, -FRAC_PI_2)],
                vec![(4.1, 1.3), (4.7, 1.5)],
            ),
        ],
        // kitchen island
        obstacles: vec![rect(20, 10, 27, 14)],
        alice: p(3.5, 3.5, 0.0),
        david: p(5.5, 3.0, PI),
        distractor: ("mug", "mug"),
    }
}

fn bathroom() -> LayoutDef {
    use FurnitureKind::*;
    LayoutDef {
        table_origin: (3.0, 0.6),
        furniture: vec![
            furn(
                "cabinet",
                Cabinet,
                rect(0, 20, 7, 31),
                true,
                vec![p(1.05, 2.6, PI)],
                vec![(0.55, 2.4), (0.55, 2.8)],
            ),
            furn(
                "drawer",
                Drawer,
                rect(62, 30, 69, 39),
                true,
                vec![p(5.95, 3.5, 0.0)],
                vec![(6.4, 3.3), (6.4, 3.7)],
            ),
            furn(
                "tray_stand",
                TrayStand,
                rect(30, 52, 39, 59),
                false,
                vec![p(3.5, 5.0, FRAC_PI_2)],
                vec![(3.3, 5.5), (3.7, 5.5)],
            ),
            furn(
                "counter",
                Counter,
                rect(0, 45, 5, 59),
                false,
                vec![p(0.8, 5.2, PI)],
                vec![(0.3, 5.0), (0.3, 5.4)],
            ),
        ],
        // bathtub
        obstacles: vec![rect(55, 50, 69, 59)],
        alice: p(5.0, 3.0, FRAC_PI_2),
        david: p(2.0, 4.0, 0.0),
        distractor: ("towel", "towel"),
    }
}

fn bedroom() -> LayoutDef {
    use FurnitureKind::*;
    LayoutDef {
        table_origin: (2.0, 3.8),
        furniture: vec![
            furn(
                "drawer",
                Drawer,
                rect(0, 0, 7, 7),
                true,
                vec![p(1.05, 0.4, PI)],
                vec![(0.55, 0.3), (0.55, 0.55)],
            ),
            furn(
                "wardrobe",
                Cabinet,
                rect(62, 0, 69, 11),
                true,
                vec![p(5.95, 0.6, 0.0)],
                vec![(6.4, 0.4), (6.4, 0.8)],
            ),
            furn(
                "desk",
                Table,
                rect(60, 40, 69, 51),
                false,
                vec![p(5.75, 4.6, 0.0)],
                vec![(6.3, 4.4), (6.3, 4.8)],
            ),
            furn(
                "dresser",
                Counter,
                rect(30, 0, 45, 5),
                false,
                vec![p(3.5, 0.8, -FRAC_PI_2), p(4.2, 0.8, -FRAC_PI_2)],
                vec![(3.4, 0.3), (4.3, 0.3)],
            ),
        ],
        // bed
        obstacles: vec![rect(50, 20, 65, 32)],
        alice: p(4.5, 2.5, 0.0),
        david: p(1.5, 2.0, 0.0),
        distractor: ("pillow", "pillow"),
    }
}
