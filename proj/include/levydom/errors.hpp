#pragma once

#include <stdexcept>
#include <string>

namespace levydom {

struct UnsupportedMeasure : std::runtime_error {
    explicit UnsupportedMeasure(const std::string& what) : std::runtime_error(what) {}
};

struct QuadratureFailure : std::runtime_error {
    explicit QuadratureFailure(const std::string& what) : std::runtime_error(what) {}
};

struct RootIsolationFailure : std::runtime_error {
    explicit RootIsolationFailure(const std::string& what) : std::runtime_error(what) {}
};

struct HypothesisViolated : std::runtime_error {
    explicit HypothesisViolated(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidDirections : std::runtime_error {
    explicit InvalidDirections(const std::string& what) : std::runtime_error(what) {}
};

struct InfiniteActivity : std::runtime_error {
    explicit InfiniteActivity(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace levydom
