import math
import typing as T
from collections import defaultdict

from shapely.geometry import Point, box as shapely_box
from shapely.prepared import prep

from .types_fmt import GpsRecord

DEFAULT_GRID_STEP = 0.01

LatLon = T.Tuple[float, float]


class GeoBoundingBox(T.NamedTuple):
    min_lat: float
    max_lat: float
    min_lon: float
    max_lon: float

    @classmethod
    def from_values(cls, values: T.Sequence[float]) -> "GeoBoundingBox":
        if len(values) != 4:
            raise ValueError(f"Expect 4 box values, got {len(values)}")
        bbox = cls(*(float(v) for v in values))
        bbox.validate()
        return bbox

    def validate(self) -> None:
        if not (-90 <= self.min_lat < self.max_lat <= 90):
            raise ValueError(f"Invalid latitude range {self.min_lat}..{self.max_lat}")
        if not (-180 <= self.min_lon < self.max_lon <= 180):
            raise ValueError(f"Invalid longitude range {self.min_lon}..{self.max_lon}")

    def polygon(self):
        return shapely_box(self.min_lon, self.min_lat, self.max_lon, self.max_lat)


def validate_lat_lon(lat: float, lon: float) -> None:
    if not (math.isfinite(lat) and -90 <= lat <= 90):
        raise ValueError(f"latitude {lat} out of range")
    if not (math.isfinite(lon) and -180 <= lon <= 180):
        raise ValueError(f"longitude {lon} out of range")


def grid_cell(lat: float, lon: float, grid_step: float = DEFAULT_GRID_STEP) -> T.Tuple[int, int]:
    """
    Index of the grid cell holding a position.

    >>> grid_cell(52.525, 13.405)
    (5252, 1340)
    """
    return math.floor(lat / grid_step), math.floor(lon / grid_step)


def cell_center(cell: T.Tuple[int, int], grid_step: float = DEFAULT_GRID_STEP) -> LatLon:
    """
    >>> cell_center((0, -1), 0.5)
    (0.25, -0.25)
    """
    return (cell[0] + 0.5) * grid_step, (cell[1] + 0.5) * grid_step


def home_location(gps: T.Sequence[GpsRecord], grid_step: float = DEFAULT_GRID_STEP) -> LatLon:
    """
    Center of the most visited grid cell.

    Ties go to the cell visited first, then to the smaller (lat, lon) center.
    """
    if grid_step <= 0:
        raise ValueError(f"grid_step must be positive, got {grid_step}")
    if not gps:
        raise ValueError("no location data")

    counts: T.Dict[T.Tuple[int, int], int] = defaultdict(int)
    first_visit: T.Dict[T.Tuple[int, int], float] = {}
    for record in gps:
        cell = grid_cell(record.lat, record.lon, grid_step)
        counts[cell] += 1
        if cell not in first_visit or record.timestamp < first_visit[cell]:
            first_visit[cell] = record.timestamp

    best = min(
        counts,
        key=lambda cell: (-counts[cell], first_visit[cell], cell_center(cell, grid_step)),
    )
    return cell_center(best, grid_step)


def home_locations(
    gps: T.Iterable[GpsRecord], grid_step: float = DEFAULT_GRID_STEP
) -> T.Dict[str, LatLon]:
    per_individual: T.Dict[str, T.List[GpsRecord]] = defaultdict(list)
    for record in gps:
        per_individual[record.individual_id].append(record)
    return {
        individual_id: home_location(records, grid_step)
        for individual_id, records in sorted(per_individual.items())
    }


def select_cohort(homes: T.Mapping[str, LatLon], bbox: GeoBoundingBox) -> T.Set[str]:
    # closed box: homes on the boundary are inside
    bbox.validate()
    area = prep(bbox.polygon())
    return {
        individual_id
        for individual_id, (lat, lon) in homes.items()
        if area.covers(Point(lon, lat))
    }
