"""Keypoint-based camera pose self-supervision, geometric core."""
from .camera import CameraPose, multiplex_init, multiplex_weights, project
from .heatmap import HeatmapSpec, decode_keypoints, keypoint_loss, proxy_heatmaps, synthetic_predictor, weight_mask
from .mesh import (ColorMap, KeypointSet, TriMesh, deformation_loss, face_labels, farthest_point_sampling,
                   laplacian_loss, load_obj, make_color_map, save_obj)
from .metrics import angular_error_deg, iou, jaccard_stats, mask_loss, pixel_loss, total_loss
from .multiplex import MultiplexConfig, optimize_camera, run_multiplex
from .pnp import Correspondences, RansacParams, ransac_pnp, solve_orthographic_pnp
from .raster import distance_transform, render_labels, render_silhouette, render_vertex_colors
from .rotation import (geodesic_angle, gram_schmidt_6d, matrix_to_quat, quat_loss_double_cover, quat_to_matrix,
                       rotation_from_euler, svd_orthogonalize)
from .synth import build_scenario, make_shape, make_trajectory

__version__ = "0.1.0"
