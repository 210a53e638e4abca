#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace quadhedge {

using NodeId = std::int64_t;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input document (bad JSON, wrong field types, ...).
class ParseError : public Error {
public:
    using Error::Error;
};

/// A typed invariant of a model object is violated.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Stage or id arguments outside their legal range.
class IndexError : public Error {
public:
    using Error::Error;
};

/// Policy space too large for the requested enumeration cap.
class CapacityError : public Error {
public:
    CapacityError(std::size_t free_nodes, std::uint64_t cap)
        : Error("policy space 2^" + std::to_string(free_nodes) +
                " exceeds cap " + std::to_string(cap)),
          free_nodes(free_nodes), cap(cap) {}

    std::size_t free_nodes;
    std::uint64_t cap;
};

/// E[a' dF^2] vanished at an alive continuation node: the one-step futures
/// trade is indeterminate there.
class SingularityError : public Error {
public:
    SingularityError(NodeId node, const std::string& what)
        : Error(what), node(node) {}

    NodeId node;
};

/// The quadratic weight `a` collapsed at an alive node.
class DegenerateWeightError : public Error {
public:
    DegenerateWeightError(NodeId node, const std::string& what)
        : Error(what), node(node) {}

    NodeId node;
};

/// The one-step change-of-measure normalizer vanished.
class DegenerateMeasureError : public Error {
public:
    DegenerateMeasureError(NodeId node, const std::string& what)
        : Error(what), node(node) {}

    NodeId node;
};

/// Child prices of an alive node do not straddle the node price: no
/// one-step martingale distribution exists.
class ArbitrageError : public Error {
public:
    ArbitrageError(NodeId node, const std::string& what)
        : Error(what), node(node) {}

    NodeId node;
};

class UsageError : public Error {
public:
    using Error::Error;
};

}  // namespace quadhedge
