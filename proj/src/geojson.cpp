#include "demsr/geojson.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "demsr/error.hpp"

namespace demsr {

namespace {

using nlohmann::json;

std::string feature_id(const json& feature, std::size_t index) {
    if (feature.contains("id")) {
        const auto& id = feature["id"];
        if (id.is_string()) return id.get<std::string>();
        if (id.is_number()) return std::to_string(id.get<long>());
    }
    if (feature.contains("properties") && feature["properties"].is_object()) {
        const auto& props = feature["properties"];
        if (props.contains("id")) {
            const auto& id = props["id"];
            if (id.is_string()) return id.get<std::string>();
            if (id.is_number()) return std::to_string(id.get<long>());
        }
    }
    return "feature_" + std::to_string(index);
}

Point parse_position(const json& pos) {
    if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number()) {
        throw ParseError("geojson: coordinate position must be a [x, y] number pair");
    }
    return {pos[0].get<double>(), pos[1].get<double>()};
}

}  // namespace

VectorLayers read_geojson(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(std::string("geojson: invalid JSON: ") + e.what());
    }
    if (doc.value("type", "") != "FeatureCollection") {
        throw ParseError("geojson: expected a FeatureCollection");
    }
    if (!doc.contains("features") || !doc["features"].is_array()) {
        throw ParseError("geojson: FeatureCollection has no features array");
    }

    VectorLayers layers;
    std::size_t idx = 0;
    for (const auto& feature : doc["features"]) {
        const std::string id = feature_id(feature, idx++);
        if (!feature.contains("geometry") || !feature["geometry"].is_object()) {
            throw ParseError("geojson: feature '" + id + "' has no geometry");
        }
        const auto& geom = feature["geometry"];
        const std::string type = geom.value("type", "");
        if (type == "LineString") {
            Polyline line;
            line.id = id;
            for (const auto& pos : geom.at("coordinates")) {
                line.vertices.push_back(parse_position(pos));
            }
            if (line.vertices.size() < 2) {
                throw ParseError("geojson: LineString '" + id + "' needs at least 2 positions");
            }
            layers.roads.push_back(std::move(line));
        } else if (type == "Polygon") {
            const auto& rings = geom.at("coordinates");
            if (!rings.is_array() || rings.empty()) {
                throw ParseError("geojson: Polygon '" + id + "' has no rings");
            }
            if (rings.size() > 1) {
                throw ParseError("geojson: Polygon '" + id +
                                 "' has interior rings; holes are not supported");
            }
            PolygonSet::Polygon poly;
            poly.id = id;
            for (const auto& pos : rings[0]) poly.ring.push_back(parse_position(pos));
            if (poly.ring.size() < 4) {
                throw ParseError("geojson: Polygon '" + id + "' ring needs at least 4 positions");
            }
            const Point& first = poly.ring.front();
            const Point& last = poly.ring.back();
            if (first.x != last.x || first.y != last.y) {
                throw ParseError("geojson: Polygon '" + id + "' ring is not closed");
            }
            poly.ring.pop_back();  // stored open, closed implicitly
            layers.buildings.polygons.push_back(std::move(poly));
        } else {
            throw ParseError("geojson: unsupported geometry type '" + type + "' in feature '" +
                             id + "'");
        }
    }
    return layers;
}

VectorLayers read_geojson_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return read_geojson(in);
}

void write_roads_geojson(const std::vector<Polyline>& roads, std::ostream& out) {
    json features = json::array();
    for (const Polyline& road : roads) {
        json coords = json::array();
        for (const Point& p : road.vertices) coords.push_back({p.x, p.y});
        features.push_back({{"type", "Feature"},
                            {"id", road.id},
                            {"properties", json::object()},
                            {"geometry", {{"type", "LineString"}, {"coordinates", coords}}}});
    }
    out << json{{"type", "FeatureCollection"}, {"features", features}}.dump(2) << '\n';
}

void write_roads_geojson_file(const std::vector<Polyline>& roads, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_roads_geojson(roads, out);
}

void write_buildings_geojson(const PolygonSet& buildings, const std::vector<double>& heights,
                             std::ostream& out) {
    json features = json::array();
    for (std::size_t i = 0; i < buildings.polygons.size(); ++i) {
        const auto& poly = buildings.polygons[i];
        json ring = json::array();
        for (const Point& p : poly.ring) ring.push_back({p.x, p.y});
        ring.push_back({poly.ring.front().x, poly.ring.front().y});
        json props = json::object();
        if (i < heights.size()) props["height"] = heights[i];
        features.push_back({{"type", "Feature"},
                            {"id", poly.id},
                            {"properties", props},
                            {"geometry", {{"type", "Polygon"}, {"coordinates", {ring}}}}});
    }
    out << json{{"type", "FeatureCollection"}, {"features", features}}.dump(2) << '\n';
}

void write_buildings_geojson_file(const PolygonSet& buildings, const std::vector<double>& heights,
                                  const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_buildings_geojson(buildings, heights, out);
}

}  // namespace demsr
