from .camera import (
    Pixel,
    camera_heading,
    frame_corners_world,
    intrinsic_inverse,
    pixel_to_world,
    viewable_area,
    world_to_pixel,
)
from .planar import (
    Polygon2D,
    convex_hull,
    normalize_angle,
    point_in_polygon,
    polygon_ray_exit,
    polygons_overlap,
)

__all__ = [
    "Pixel",
    "Polygon2D",
    "camera_heading",
    "convex_hull",
    "frame_corners_world",
    "intrinsic_inverse",
    "normalize_angle",
    "pixel_to_world",
    "point_in_polygon",
    "polygon_ray_exit",
    "polygons_overlap",
    "viewable_area",
    "world_to_pixel",
]
