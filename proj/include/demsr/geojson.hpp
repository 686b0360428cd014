#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "demsr/eval_morph.hpp"

namespace demsr {

/// Vector layers parsed from the supported GeoJSON subset: a FeatureCollection
/// of LineString (roads) and Polygon (buildings, single ring) features in the
/// grid's planar coordinate system. Any other geometry type is rejected.
struct VectorLayers {
    std::vector<Polyline> roads;
    PolygonSet buildings;
};

VectorLayers read_geojson(std::istream& in);
VectorLayers read_geojson_file(const std::string& path);

void write_roads_geojson(const std::vector<Polyline>& roads, std::ostream& out);
void write_roads_geojson_file(const std::vector<Polyline>& roads, const std::string& path);

/// heights, when non-empty, is written as a per-feature property.
void write_buildings_geojson(const PolygonSet& buildings, const std::vector<double>& heights,
                             std::ostream& out);
void write_buildings_geojson_file(const PolygonSet& buildings, const std::vector<double>& heights,
                                  const std::string& path);

}  // namespace demsr
