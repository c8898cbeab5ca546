"""Interactive navigation through traversable obstacles.

Text instructions become (landmark, attribute) directives; a grounder turns
them into pixel bounding boxes; LiDAR clouds are segmented by box membership
of their image projections; an action-aware layered costmap is built and an
A* planner finds paths through obstacles the instruction declared traversable.
"""

from .costmap import Costmap, GridSpec, FREESPACE, LETHAL, inflate, save_pgm, load_pgm
from .geometry import BEHIND_CAMERA, CameraModel, PixelCoord, in_box, project
from .grounding import AttributedBox, BoundingBox, GrounderNoise, attach_attributes, ground_synthetic
from .instruction import Instruction, LandmarkDirective, VerbLexicon, parse_instruction
from .planner import Path, PlanningError, plan
from .runtime import MissionConfig, MissionReport, MissionRuntime, run_mission
from .segmentation import PointCloud, SegmentedCloud, segment
from .simworld import LidarSpec, RobotState, Scenario, SceneObject, World, lidar_scan

__version__ = "0.1.0"
