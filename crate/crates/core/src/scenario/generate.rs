//! Seeded placement of task objects into a layout.
//!
//! Each object gets a placement class that fixes how much work it takes to
//! bring it to the fixed arm:
//!
//! | class      | where                                        | needs            |
//! |------------|----------------------------------------------|------------------|
//! | near       | work table, inside the fixed arm's reach     | nothing          |
//! | far_easy   | far end of the work table                    | transport        |
//! | far_move   | middle of the work table, off every nav pose | transport + move |
//! | container  | inside a closed container                    | open + transport |
//! | surface    | on another open surface                      | explore + transport |

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::layouts::{Layout, LayoutDef, HEIGHT, RESOLUTION, TABLE_DEPTH, TABLE_LENGTH, WIDTH};
use super::{GridSpec, Scenario};
use crate::tasks::{Assignment, TaskKind, TaskSpec};
use crate::world::{
    Cell, CellRect, Color, Furniture, FurnitureKind, Gripper, Point2, Pose2D, Robot, RobotId, SimObject, Support,
    Thresholds, Zone, DEFAULT_REACH_ALICE, DEFAULT_REACH_BOB,
};

pub const SHIPPED_OBJECT_COUNTS: [usize; 4] = [3, 4, 5, 6];

const WORK_TABLE: &str = "work_table";
const NEAR_SLOTS: [(f64, f64); 4] = [(0.24, 0.26), (0.24, 0.54), (0.52, 0.26), (0.52, 0.54)];
const FAR_EASY_SLOTS: [(f64, f64); 2] = [(1.75, 0.25), (1.75, 0.60)];
const FAR_MOVE_SLOT: (f64, f64) = (1.00, 0.45);
const CENTER_ZONE: (f64, f64) = (0.30, 0.40);
const PANEL_SLOTS: [(f64, f64); 6] = [
    (0.12, 0.12),
    (0.36, 0.12),
    (0.12, 0.40),
    (0.36, 0.40),
    (0.12, 0.68),
    (0.36, 0.68),
];

const PACK_ITEMS: [(&str, &str); 7] = [
    ("apple", "apple"),
    ("fork", "fork"),
    ("soap", "soap"),
    ("toy_duck", "toy duck"),
    ("phone", "phone"),
    ("bottle", "bottle"),
    ("book", "book"),
];
const SHAPES: [&str; 6] = ["cube", "cylinder", "cone", "sphere", "prism", "pyramid"];
const FILLINGS: [(&str, &str); 6] = [
    ("ham", "ham"),
    ("bacon", "bacon"),
    ("tomato", "tomato"),
    ("cucumber", "cucumber"),
    ("cheese", "cheese"),
    ("beef_patty", "beef patty"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Near,
    FarEasy,
    FarMove,
    Container,
    Surface,
}

fn classes(n: usize) -> Vec<Class> {
    use Class::*;
    match n {
        0..=3 => vec![Near, FarMove, Container],
        4 => vec![Near, FarMove, Container, Surface],
        5 => vec![Near, Near, FarMove, Container, Surface],
        _ => vec![Near, Near, FarMove, FarEasy, Container, Surface],
    }
}

fn r6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

fn pose(x: f64, y: f64, theta: f64) -> Pose2D {
    Pose2D::new(r6(x), r6(y), theta)
}

/// Default seed for a shipped configuration.
pub fn default_seed(layout: Layout, task: TaskKind, n: usize) -> u64 {
    let l = Layout::ALL.iter().position(|x| *x == layout).unwrap_or(0) as u64;
    let t = TaskKind::ALL.iter().position(|x| *x == task).unwrap_or(0) as u64;
    1000 + 100 * l + 10 * t + n as u64
}

pub fn shipped_file_name(layout: Layout, task: TaskKind, n: usize) -> String {
    format!("{}_{}_{n}.json", layout.as_str(), task.as_str())
}

/// Every shipped configuration: 3 layouts x 3 tasks x 4 object counts.
pub fn shipped_grid() -> Vec<(Layout, TaskKind, usize)> {
    let mut out = Vec::new();
    for task in TaskKind::ALL {
        for layout in Layout::ALL {
            for n in SHIPPED_OBJECT_COUNTS {
                out.push((layout, task, n));
            }
        }
    }
    out
}

/// The shipped scenario for this configuration.
pub fn generate(layout: Layout, task: TaskKind, n: usize) -> Scenario {
    generate_with_seed(layout, task, n, default_seed(layout, task, n))
}

struct Item {
    id: String,
    display: String,
    category: String,
    color: Option<Color>,
}

fn item(id: &str, display: &str, category: &str, color: Option<Color>) -> Item {
    Item {
        id: id.into(),
        display: display.into(),
        category: category.into(),
        color,
    }
}

/// Places `n` task objects (clamped to 3..=6) with a seeded generator.
pub fn generate_with_seed(layout: Layout, task: TaskKind, n: usize, seed: u64) -> Scenario {
    let n = n.clamp(3, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let def = layout.def();
    let (ox, oy) = def.table_origin;

    // task vocabulary
    let mut zones = Vec::new();
    let zone = |id: &str, color: Option<Color>, (x, y): (f64, f64), half: f64| Zone {
        id: id.into(),
        furniture: WORK_TABLE.into(),
        color,
        center: Point2 {
            x: r6(ox + x),
            y: r6(oy + y),
        },
        half_extent: Point2 { x: half, y: half },
        contents: vec![],
    };
    let (items, spec) = match task {
        TaskKind::PackObjects => {
            let mut pool = PACK_ITEMS.to_vec();
            pool.shuffle(&mut rng);
            let items: Vec<Item> = pool[..n].iter().map(|(id, d)| item(id, d, id, None)).collect();
            zones.push(zone("tray", None, CENTER_ZONE, 0.12));
            let spec = TaskSpec::PackObjects {
                object_ids: items.iter().map(|i| i.id.clone()).collect(),
                tray_id: "tray".into(),
            };
            (items, spec)
        }
        TaskKind::SortSolids => {
            let mut colors = Color::ALL.to_vec();
            colors.shuffle(&mut rng);
            let mut shapes = SHAPES.to_vec();
            shapes.shuffle(&mut rng);
            let mut items = Vec::new();
            let mut assignments = Vec::new();
            for (i, (color, shape)) in colors.iter().zip(&shapes).take(n).enumerate() {
                let id = format!("{}_{shape}", color.as_str());
                let panel = format!("{}_panel", color.as_str());
                items.push(item(&id, &format!("{} {shape}", color.as_str()), "solid", Some(*color)));
                zones.push(zone(&panel, Some(*color), PANEL_SLOTS[i], 0.08));
                assignments.push(Assignment {
                    solid_id: id,
                    panel_id: panel,
                });
            }
            (items, TaskSpec::SortSolids { assignments })
        }
        TaskKind::MakeSandwich => {
            let mut fillings = FILLINGS.to_vec();
            fillings.shuffle(&mut rng);
            let mut items = vec![item("bread_slice_1", "bread slice", "bread_slice", None)];
            items.extend(fillings[..n - 2].iter().map(|(id, d)| item(id, d, id, None)));
            items.push(item("bread_slice_2", "bread slice", "bread_slice", None));
            zones.push(zone("cutting_board", None, CENTER_ZONE, 0.12));
            let spec = TaskSpec::MakeSandwich {
                ordered_ingredient_ids: items.iter().map(|i| i.id.clone()).collect(),
                board_id: "cutting_board".into(),
            };
            (items, spec)
        }
    };

    // placement
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.shuffle(&mut rng);
    let mut near = NEAR_SLOTS.to_vec();
    near.shuffle(&mut rng);
    let mut far_easy = FAR_EASY_SLOTS.to_vec();
    far_easy.shuffle(&mut rng);
    let containers: Vec<usize> = (0..def.furniture.len())
        .filter(|i| def.furniture[*i].openable)
        .collect();
    let surfaces: Vec<usize> = (0..def.furniture.len())
        .filter(|i| !def.furniture[*i].openable)
        .collect();
    let mut used: Vec<(usize, usize)> = Vec::new();
    let mut pick_slot = |rng: &mut ChaCha8Rng, candidates: &[usize], def: &LayoutDef| -> (usize, (f64, f64)) {
        loop {
            let f = candidates[rng.gen_range(0..candidates.len())];
            let s = rng.gen_range(0..def.furniture[f].slots.len());
            if !used.contains(&(f, s)) {
                used.push((f, s));
                return (f, def.furniture[f].slots[s]);
            }
        }
    };

    let mut objects = Vec::new();
    let mut table_surface = Vec::new();
    let mut on_furniture: Vec<Vec<String>> = vec![Vec::new(); def.furniture.len()];
    for (class, idx) in classes(n).into_iter().zip(order) {
        let it = &items[idx];
        let (support, (x, y)) = match class {
            Class::Near => (
                Support::OnFurniture(WORK_TABLE.into()),
                offset(def.table_origin, near.pop().unwrap()),
            ),
            Class::FarEasy => (
                Support::OnFurniture(WORK_TABLE.into()),
                offset(def.table_origin, far_easy.pop().unwrap()),
            ),
            Class::FarMove => (
                Support::OnFurniture(WORK_TABLE.into()),
                offset(def.table_origin, FAR_MOVE_SLOT),
            ),
            Class::Container => {
                let (f, at) = pick_slot(&mut rng, &containers, &def);
                on_furniture[f].push(it.id.clone());
                (Support::InFurniture(def.furniture[f].id.into()), at)
            }
            Class::Surface => {
                let (f, at) = pick_slot(&mut rng, &surfaces, &def);
                on_furniture[f].push(it.id.clone());
                (Support::OnFurniture(def.furniture[f].id.into()), at)
            }
        };
        if support == Support::OnFurniture(WORK_TABLE.into()) {
            table_surface.push(it.id.clone());
        }
        objects.push(SimObject {
            id: it.id.clone(),
            display_name: it.display.clone(),
            category: it.category.clone(),
            color: it.color,
            pose: pose(x, y, 0.0),
            support,
            zone: None,
        });
    }
    // one unrelated object somewhere else in the room
    let all: Vec<usize> = (0..def.furniture.len()).collect();
    let (f, (x, y)) = pick_slot(&mut rng, &all, &def);
    let (did, dname) = def.distractor;
    on_furniture[f].push(did.into());
    objects.push(SimObject {
        id: did.into(),
        display_name: dname.into(),
        category: did.into(),
        color: None,
        pose: pose(x, y, 0.0),
        support: if def.furniture[f].openable {
            Support::InFurniture(def.furniture[f].id.into())
        } else {
            Support::OnFurniture(def.furniture[f].id.into())
        },
        zone: None,
    });
    objects.sort_by(|a, b| a.id.cmp(&b.id));
    table_surface.sort();

    let mut furniture = vec![work_table(def.table_origin, table_surface)];
    for (fd, ids) in def.furniture.iter().zip(on_furniture) {
        let mut ids = ids;
        ids.sort();
        furniture.push(Furniture {
            id: fd.id.into(),
            kind: fd.kind,
            footprint: vec![fd.rect],
            openable: fd.openable,
            is_open: false,
            nav_targets: fd.nav.iter().map(|p| pose(p.x, p.y, p.theta)).collect(),
            surface_object_ids: if fd.openable { vec![] } else { ids.clone() },
            contained_object_ids: if fd.openable { ids } else { vec![] },
        });
    }

    let robots = vec![
        Robot {
            id: RobotId::Alice,
            role: RobotId::Alice.role(),
            base_pose: def.alice,
            gripper: Gripper::Empty,
            reach_radius: Some(DEFAULT_REACH_ALICE),
        },
        Robot {
            id: RobotId::Bob,
            role: RobotId::Bob.role(),
            base_pose: pose(ox - 0.15, oy + 0.40, 0.0),
            gripper: Gripper::Empty,
            reach_radius: Some(DEFAULT_REACH_BOB),
        },
        Robot {
            id: RobotId::David,
            role: RobotId::David.role(),
            base_pose: def.david,
            gripper: Gripper::Empty,
            reach_radius: None,
        },
    ];

    Scenario {
        name: format!("{}_{}_{n}", layout.as_str(), task.as_str()),
        layout: layout.as_str().into(),
        seed,
        grid: GridSpec {
            resolution: RESOLUTION,
            width: WIDTH,
            height: HEIGHT,
            obstacles: def.obstacles,
        },
        thresholds: Thresholds::default(),
        furniture,
        zones,
        objects,
        robots,
        task: spec,
    }
}

fn offset((ox, oy): (f64, f64), (x, y): (f64, f64)) -> (f64, f64) {
    (ox + x, oy + y)
}

fn work_table((ox, oy): (f64, f64), surface: Vec<String>) -> Furniture {
    let c0 = (ox / RESOLUTION).round() as u32;
    let r0 = (oy / RESOLUTION).round() as u32;
    let c1 = c0 + (TABLE_LENGTH / RESOLUTION).round() as u32 - 1;
    let r1 = r0 + (TABLE_DEPTH / RESOLUTION).round() as u32 - 1;
    let half_pi = std::f64::consts::FRAC_PI_2;
    Furniture {
        id: WORK_TABLE.into(),
        kind: FurnitureKind::Table,
        footprint: vec![CellRect::new(Cell::new(c0, r0), Cell::new(c1, r1))],
        openable: false,
        is_open: false,
        nav_targets: vec![
            pose(ox + 0.24, oy - 0.15, half_pi),
            pose(ox + 1.70, oy - 0.15, half_pi),
            pose(ox + 1.70, oy + TABLE_DEPTH + 0.15, -half_pi),
            pose(ox + TABLE_LENGTH + 0.15, oy + 0.40, std::f64::consts::PI),
        ],
        surface_object_ids: surface,
        contained_object_ids: vec![],
    }
}
