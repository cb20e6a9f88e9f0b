//! Small hand-built world shared by unit tests.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use crate::world::{
    Cell, CellRect, Color, Furniture, FurnitureKind, GridMap, Gripper, Point2, Pose2D, Robot, RobotId, SimObject,
    Support, Thresholds, WorldState, Zone, DEFAULT_REACH_ALICE, DEFAULT_REACH_BOB,
};

fn rect(c0: u32, r0: u32, c1: u32, r1: u32) -> CellRect {
    CellRect::new(Cell::new(c0, r0), Cell::new(c1, r1))
}

fn object(id: &str, category: &str, color: Option<Color>, x: f64, y: f64, support: Support) -> SimObject {
    SimObject {
        id: id.into(),
        display_name: id.replace('_', " "),
        category: category.into(),
        color,
        pose: Pose2D::at(x, y),
        support,
        zone: None,
    }
}

fn zone(id: &str, color: Option<Color>, x: f64, y: f64, half: f64) -> Zone {
    Zone {
        id: id.into(),
        furniture: "work_table".into(),
        color,
        center: Point2 { x, y },
        half_extent: Point2 { x: half, y: half },
        contents: vec![],
    }
}

/// 4 m x 3 m room: a work table with Bob beside it, a counter, a closed
/// fridge holding the apple.
///
/// ```text
///   y=3 +---------------------------------+
///       | counter |                       |
///       |         +-----work_table----+   |
///       | bob ->  | tray  ...    soap |   |
///       |         +-------------------+   |
///       | david        alice       fridge |
///   y=0 +---------------------------------+
/// ```
pub fn small_world() -> WorldState {
    let mut grid = GridMap::new(40, 30, 0.1).unwrap();
    let table = rect(10, 10, 29, 17);
    let counter = rect(0, 26, 9, 29);
    let fridge = rect(34, 0, 39, 7);
    for r in [table, counter, fridge] {
        grid.fill_rect(&r);
    }

    let on = |f: &str| Support::OnFurniture(f.into());
    let mut objects = vec![
        object("apple", "apple", None, 3.7, 0.4, Support::InFurniture("fridge".into())),
        object("fork", "fork", None, 0.2, 2.8, on("counter")),
        object("soap", "soap", None, 2.8, 1.4, on("work_table")),
        object("toy_duck", "toy_duck", None, 1.1, 1.5, on("work_table")),
        object("red_cube", "solid", Some(Color::Red), 1.2, 1.3, on("work_table")),
        object("blue_cylinder", "solid", Some(Color::Blue), 0.3, 2.8, on("counter")),
    ];
    for (i, ing) in [
        "bread_slice_1",
        "bread_slice_2",
        "ham",
        "tomato",
        "cheese",
        "bacon",
        "cucumber",
    ]
    .iter()
    .enumerate()
    {
        let category = ing.trim_end_matches(|c: char| c.is_ascii_digit() || c == '_');
        objects.push(object(ing, category, None, 0.4 + 0.08 * i as f64, 2.7, on("counter")));
    }

    let mut furniture = BTreeMap::new();
    let mut add = |id: &str, kind, footprint, openable, nav: Vec<Pose2D>| {
        let surface = objects
            .iter()
            .filter(|o| o.support == Support::OnFurniture(id.into()))
            .map(|o| o.id.clone())
            .collect();
        let contained = objects
            .iter()
            .filter(|o| o.support == Support::InFurniture(id.into()))
            .map(|o| o.id.clone())
            .collect();
        furniture.insert(
            id.to_string(),
            Furniture {
                id: id.into(),
                kind,
                footprint: vec![footprint],
                openable,
                is_open: false,
                nav_targets: nav,
                surface_object_ids: surface,
                contained_object_ids: contained,
            },
        );
    };
    add(
        "work_table",
        FurnitureKind::Table,
        table,
        false,
        vec![Pose2D::new(1.25, 0.85, FRAC_PI_2), Pose2D::new(2.8, 0.85, FRAC_PI_2)],
    );
    add(
        "counter",
        FurnitureKind::Counter,
        counter,
        false,
        vec![Pose2D::new(0.55, 2.45, FRAC_PI_2)],
    );
    add(
        "fridge",
        FurnitureKind::Fridge,
        fridge,
        true,
        vec![Pose2D::new(3.25, 0.45, 0.0)],
    );

    let zones = [
        zone("tray", None, 1.30, 1.40, 0.10),
        zone("red_panel", Some(Color::Red), 1.12, 1.12, 0.08),
        zone("blue_panel", Some(Color::Blue), 1.36, 1.12, 0.08),
        zone("cutting_board", None, 1.30, 1.62, 0.10),
    ]
    .into_iter()
    .map(|z| (z.id.clone(), z))
    .collect();

    let robot = |id: RobotId, x: f64, y: f64, reach: Option<f64>| Robot {
        id,
        role: id.role(),
        base_pose: Pose2D::at(x, y),
        gripper: Gripper::Empty,
        reach_radius: reach,
    };
    let robots = [
        robot(RobotId::Alice, 2.0, 0.5, Some(DEFAULT_REACH_ALICE)),
        robot(RobotId::Bob, 0.85, 1.4, Some(DEFAULT_REACH_BOB)),
        robot(RobotId::David, 0.5, 0.5, None),
    ]
    .into_iter()
    .map(|r| (r.id, r))
    .collect();

    WorldState {
        grid,
        furniture,
        zones,
        objects: objects.into_iter().map(|o| (o.id.clone(), o)).collect(),
        robots,
        thresholds: Thresholds::default(),
        step: 0,
    }
}

/// Teleports an object on top of a zone's stack, bypassing the arm.
pub fn put_in_zone(world: &mut WorldState, object_id: &str, zone_id: &str) {
    let obj = world.objects[object_id].clone();
    for f in world.furniture.values_mut() {
        f.surface_object_ids.retain(|i| i != object_id);
        f.contained_object_ids.retain(|i| i != object_id);
    }
    for z in world.zones.values_mut() {
        z.contents.retain(|i| i != object_id);
    }
    if let Support::InGripper(r) = obj.support {
        world.robots.get_mut(&r).unwrap().gripper = Gripper::Empty;
    }
    let zone = world.zones.get_mut(zone_id).unwrap();
    zone.contents.push(object_id.into());
    let (furniture, center) = (zone.furniture.clone(), zone.center_pose());
    world
        .furniture
        .get_mut(&furniture)
        .unwrap()
        .surface_object_ids
        .push(object_id.into());
    let obj = world.objects.get_mut(object_id).unwrap();
    obj.support = Support::OnFurniture(furniture);
    obj.zone = Some(zone_id.into());
    obj.pose = center;
}
