//! Per-robot belief about furniture and objects.
//!
//! Furniture and zones are known from the start. Objects enter the graph
//! only through the robot's own feedback, local observation of nearby
//! surfaces, or location reports from teammates. Conflicting updates are
//! resolved last-writer-wins on `(step, source)`, where the source order is
//! the robot acting order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::comms::{Message, MessagePayload};
use crate::feedback::{Feedback, ObjectSighting, PlacementRelation};
use crate::world::{Belief, Color, FurnitureKind, Pose2D, RobotId, Support, WorldState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Stamp {
    pub step: u32,
    pub source: RobotId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodeKind {
    Furniture {
        furniture_kind: FurnitureKind,
        openable: bool,
        nav_targets: Vec<Pose2D>,
    },
    Zone {
        furniture: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        color: Option<Color>,
    },
    Object {
        display_name: String,
        category: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        color: Option<Color>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneNode {
    pub id: String,
    pub kind: NodeKind,
    /// Last known pose.
    pub pose: Pose2D,
    pub open_state: Option<bool>,
    pub contents_known: bool,
    pub last_updated_step: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zone: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stamp: Option<Stamp>,
}

impl SceneNode {
    pub fn is_object(&self) -> bool {
        matches!(self.kind, NodeKind::Object { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "relation", content = "parent", rename_all = "snake_case")]
pub enum Relation {
    On(String),
    In(String),
    HeldBy(RobotId),
}

impl Relation {
    pub fn furniture(&self) -> Option<&str> {
        match self {
            Relation::On(f) | Relation::In(f) => Some(f),
            Relation::HeldBy(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SceneGraphError {
    #[error("feedback references unknown entity `{0}`")]
    UnknownEntity(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneGraph {
    pub owner: RobotId,
    nodes: BTreeMap<String, SceneNode>,
    /// child id → its single relation.
    relations: BTreeMap<String, Relation>,
}

impl SceneGraph {
    /// Static furniture and zones of `world`; no objects.
    pub fn from_world(owner: RobotId, world: &WorldState) -> Self {
        let mut nodes = BTreeMap::new();
        for f in world.furniture.values() {
            let (mut sx, mut sy, mut n) = (0.0, 0.0, 0.0);
            for rect in &f.footprint {
                let (x0, y0, x1, y1) = world.grid.rect_bounds(rect);
                let area = (x1 - x0) * (y1 - y0);
                sx += area * (x0 + x1) / 2.0;
                sy += area * (y0 + y1) / 2.0;
                n += area;
            }
            let pose = if n > 0.0 {
                Pose2D::at(sx / n, sy / n)
            } else {
                f.nav_targets.first().copied().unwrap_or(Pose2D::at(0.0, 0.0))
            };
            nodes.insert(
                f.id.clone(),
                SceneNode {
                    id: f.id.clone(),
                    kind: NodeKind::Furniture {
                        furniture_kind: f.kind,
                        openable: f.openable,
                        nav_targets: f.nav_targets.clone(),
                    },
                    pose,
                    open_state: f.openable.then_some(f.is_open),
                    contents_known: false,
                    last_updated_step: 0,
                    zone: None,
                    stamp: None,
                },
            );
        }
        for z in world.zones.values() {
            nodes.insert(
                z.id.clone(),
                SceneNode {
                    id: z.id.clone(),
                    kind: NodeKind::Zone {
                        furniture: z.furniture.clone(),
                        color: z.color,
                    },
                    pose: z.center_pose(),
                    open_state: None,
                    contents_known: false,
                    last_updated_step: 0,
                    zone: None,
                    stamp: None,
                },
            );
        }
        Self {
            owner,
            nodes,
            relations: BTreeMap::new(),
        }
    }

    pub fn node(&self, id: &str) -> Option<&SceneNode> {
        self.nodes.get(id)
    }

    pub fn relation(&self, id: &str) -> Option<&Relation> {
        self.relations.get(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &SceneNode> {
        self.nodes.values()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn known_object_ids(&self) -> Vec<String> {
        self.nodes
            .values()
            .filter(|n| n.is_object())
            .map(|n| n.id.clone())
            .collect()
    }

    pub fn is_furniture(&self, id: &str) -> bool {
        matches!(self.nodes.get(id).map(|n| &n.kind), Some(NodeKind::Furniture { .. }))
    }

    fn is_openable(&self, id: &str) -> bool {
        matches!(
            self.nodes.get(id).map(|n| &n.kind),
            Some(NodeKind::Furniture { openable: true, .. })
        )
    }

    /// Inserts or overwrites an object unless a newer write exists.
    fn upsert_object(
        &mut self,
        id: &str,
        info: Option<&ObjectSighting>,
        pose: Pose2D,
        relation: Relation,
        zone: Option<String>,
        stamp: Stamp,
    ) -> Result<(), SceneGraphError> {
        if let Some(existing) = self.nodes.get(id) {
            if !existing.is_object() {
                return Err(SceneGraphError::UnknownEntity(id.to_string()));
            }
            if existing.stamp.is_some_and(|s| s > stamp) {
                return Ok(());
            }
        }
        let kind = match (info, self.nodes.get(id)) {
            (Some(s), _) => NodeKind::Object {
                display_name: s.display_name.clone(),
                category: s.category.clone(),
                color: s.color,
            },
            (None, Some(n)) => n.kind.clone(),
            (None, None) => NodeKind::Object {
                display_name: id.replace('_', " "),
                category: id.to_string(),
                color: None,
            },
        };
        self.nodes.insert(
            id.to_string(),
            SceneNode {
                id: id.to_string(),
                kind,
                pose,
                open_state: None,
                contents_known: false,
                last_updated_step: stamp.step,
                zone,
                stamp: Some(stamp),
            },
        );
        self.relations.insert(id.to_string(), relation);
        Ok(())
    }

    fn touch_furniture(&mut self, id: &str, step: u32, opened: bool) -> Result<(), SceneGraphError> {
        let node = self
            .nodes
            .get_mut(id)
            .filter(|n| matches!(n.kind, NodeKind::Furniture { .. }))
            .ok_or_else(|| SceneGraphError::UnknownEntity(id.to_string()))?;
        node.contents_known = true;
        node.last_updated_step = node.last_updated_step.max(step);
        if opened {
            node.open_state = Some(true);
        }
        Ok(())
    }

    /// Applies the scene delta carried by the owner's own feedback. Failures
    /// carry none.
    pub fn update_from_feedback(&mut self, feedback: &Feedback, step: u32) -> Result<(), SceneGraphError> {
        let stamp = Stamp {
            step,
            source: self.owner,
        };
        match feedback {
            Feedback::NavigationSuccess {
                furniture,
                surface_objects,
                ..
            } => {
                if !self.is_furniture(furniture) {
                    return Err(SceneGraphError::UnknownEntity(furniture.clone()));
                }
                if let Some(list) = surface_objects {
                    self.touch_furniture(furniture, step, false)?;
                    for s in list {
                        self.upsert_object(
                            &s.id,
                            Some(s),
                            s.pose,
                            Relation::On(furniture.clone()),
                            s.zone.clone(),
                            stamp,
                        )?;
                    }
                }
                Ok(())
            }
            Feedback::OpenSuccess { furniture, contents } => {
                self.touch_furniture(furniture, step, true)?;
                for s in contents {
                    self.upsert_object(
                        &s.id,
                        Some(s),
                        s.pose,
                        Relation::In(furniture.clone()),
                        s.zone.clone(),
                        stamp,
                    )?;
                }
                Ok(())
            }
            Feedback::PickSuccess { object, holder } => {
                let pose = self
                    .nodes
                    .get(object)
                    .map(|n| n.pose)
                    .ok_or_else(|| SceneGraphError::UnknownEntity(object.clone()))?;
                self.upsert_object(object, None, pose, Relation::HeldBy(*holder), None, stamp)
            }
            Feedback::PlaceSuccess {
                object,
                location,
                relation,
                pose,
            } => {
                let (furniture, zone) = match self.nodes.get(location).map(|n| &n.kind) {
                    Some(NodeKind::Zone { furniture, .. }) => (furniture.clone(), Some(location.clone())),
                    Some(NodeKind::Furniture { .. }) => (location.clone(), None),
                    _ => return Err(SceneGraphError::UnknownEntity(location.clone())),
                };
                let rel = match relation {
                    PlacementRelation::On => Relation::On(furniture),
                    PlacementRelation::In => Relation::In(furniture),
                };
                self.upsert_object(object, None, *pose, rel, zone, stamp)
            }
            _ => Ok(()),
        }
    }

    /// Location reports insert or update the object; other payloads carry no
    /// geometry. Reports naming unknown furniture are ignored.
    pub fn update_from_message(&mut self, msg: &Message) {
        if let MessagePayload::LocationReport {
            object_name,
            pose,
            furniture_id,
        } = &msg.payload
        {
            if !self.is_furniture(furniture_id) {
                return;
            }
            let relation = if self.is_openable(furniture_id) {
                Relation::In(furniture_id.clone())
            } else {
                Relation::On(furniture_id.clone())
            };
            let stamp = Stamp {
                step: msg.sent_step,
                source: msg.sender,
            };
            // keep an existing zone if the report agrees on the furniture
            let zone = self
                .nodes
                .get(object_name)
                .filter(|_| self.relations.get(object_name) == Some(&relation))
                .and_then(|n| n.zone.clone());
            let _ = self.upsert_object(object_name, None, *pose, relation, zone, stamp);
        }
    }

    /// Local perception: the surfaces of non-openable furniture and the
    /// contents of open furniture within `radius` of the base.
    pub fn observe_surroundings(&mut self, world: &WorldState, base: &Pose2D, radius: f64, step: u32) {
        let stamp = Stamp {
            step,
            source: self.owner,
        };
        for f in world.furniture.values() {
            if world.distance_to_footprint(f, base.x, base.y) > radius {
                continue;
            }
            let (ids, inside) = if !f.openable {
                (&f.surface_object_ids, false)
            } else if f.is_open {
                (&f.contained_object_ids, true)
            } else {
                continue;
            };
            if self.touch_furniture(&f.id, step, false).is_err() {
                continue;
            }
            for id in ids {
                let Some(obj) = world.objects.get(id) else { continue };
                let relation = match (&obj.support, inside) {
                    (Support::InFurniture(p), _) | (Support::OnFurniture(p), true) => Relation::In(p.clone()),
                    (Support::OnFurniture(p), false) => Relation::On(p.clone()),
                    (Support::InGripper(r), _) => Relation::HeldBy(*r),
                };
                let sighting = ObjectSighting::of(obj);
                let _ = self.upsert_object(id, Some(&sighting), obj.pose, relation, obj.zone.clone(), stamp);
            }
        }
    }

    /// Sorted text listing: furniture, zones, then objects.
    pub fn render(&self) -> String {
        let mut out = String::from("Furniture:\n");
        for n in self.nodes.values() {
            if let NodeKind::Furniture {
                furniture_kind,
                openable,
                nav_targets,
            } = &n.kind
            {
                let state = match (openable, n.open_state) {
                    (true, Some(true)) => "open",
                    (true, _) => "closed",
                    (false, _) => "not openable",
                };
                let known = if n.contents_known {
                    "contents known"
                } else {
                    "contents unknown"
                };
                let targets = nav_targets
                    .iter()
                    .enumerate()
                    .map(|(i, p)| format!("{i}: ({:.2}, {:.2})", p.x, p.y))
                    .collect::<Vec<_>>()
                    .join(", ");
                out.push_str(&format!(
                    "- {} ({}), {state}, {known}, nav targets [{targets}]\n",
                    n.id,
                    furniture_kind.as_str()
                ));
            }
        }
        let zones: Vec<String> = self
            .nodes
            .values()
            .filter_map(|n| match &n.kind {
                NodeKind::Zone { furniture, color } => Some(match color {
                    Some(c) => format!("- {} ({} zone) on {furniture}\n", n.id, c.as_str()),
                    None => format!("- {} (zone) on {furniture}\n", n.id),
                }),
                _ => None,
            })
            .collect();
        if !zones.is_empty() {
            out.push_str("Zones:\n");
            zones.iter().for_each(|z| out.push_str(z));
        }
        out.push_str("Objects:\n");
        let mut any = false;
        for n in self.nodes.values() {
            let NodeKind::Object {
                display_name, color, ..
            } = &n.kind
            else {
                continue;
            };
            any = true;
            let name = match color {
                Some(c) if !display_name.contains(c.as_str()) => format!("{} {display_name}", c.as_str()),
                _ => display_name.clone(),
            };
            let place = match self.relations.get(&n.id) {
                Some(Relation::On(f)) => format!("on {f}"),
                Some(Relation::In(f)) => format!("in {f}"),
                Some(Relation::HeldBy(r)) => format!("held by {r}"),
                None => "location unknown".to_string(),
            };
            let zone = n.zone.as_ref().map(|z| format!(" (zone {z})")).unwrap_or_default();
            out.push_str(&format!(
                "- {} [{name}]: {place}{zone} at ({:.2}, {:.2}), seen at step {}\n",
                n.id, n.pose.x, n.pose.y, n.last_updated_step
            ));
        }
        if !any {
            out.push_str("no objects discovered yet\n");
        }
        out
    }
}

impl Belief for SceneGraph {
    fn knows_object(&self, id: &str) -> bool {
        self.nodes.get(id).is_some_and(SceneNode::is_object)
    }

    fn knows_furniture(&self, id: &str) -> bool {
        self.is_furniture(id)
    }
}
