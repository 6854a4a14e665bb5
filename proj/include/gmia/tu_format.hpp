#pragma once

#include <filesystem>
#include <string>

#include "gmia/graph.hpp"

namespace gmia {

/// Reads the TU benchmark text layout from `directory`:
///   <name>_A.txt                 "u, v" per line, 1-indexed global node ids
///   <name>_graph_indicator.txt   graph id (1-indexed) of node i at line i
///   <name>_graph_labels.txt      one integer per graph
///   <name>_node_labels.txt       optional, one integer per node (one-hot encoded)
///   <name>_node_attributes.txt   optional, comma-separated reals per node
///
/// Node-label one-hots come first in the feature matrix, attributes after.
/// With neither optional file every node gets the constant feature 1.0.
/// Graph labels are remapped to a dense 0-based range in ascending order.
/// Throws ParseError with file and line on malformed input.
Dataset parse_tu_dataset(const std::filesystem::path& directory, const std::string& name);

/// Writes `ds` in the same layout. Features go to _node_attributes.txt and
/// each undirected edge is listed in both directions.
void write_tu_dataset(const Dataset& ds, const std::filesystem::path& directory,
                      const std::string& name);

}  // namespace gmia
