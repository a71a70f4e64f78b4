#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace jobclass {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kArtifactVersion = 1;

enum class JobClass : std::uint8_t { Short = 0, Long = 1 };

inline const char* to_string(JobClass c) { return c == JobClass::Short ? "short" : "long"; }

// Error hierarchy. The CLI maps these to exit codes:
//   ConfigError -> 2, DataError/IoError -> 3, FitError -> 4.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
    using Error::Error;
};
struct DataError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};
struct FitError : Error {
    using Error::Error;
};

struct EmptyDataset : DataError {
    EmptyDataset() : DataError("empty dataset") {}
    explicit EmptyDataset(const std::string& what) : DataError(what) {}
};
struct DegenerateData : DataError {
    explicit DegenerateData(const std::string& what) : DataError(what) {}
};
struct ComponentCollapse : FitError {
    explicit ComponentCollapse(const std::string& what) : FitError(what) {}
};
struct FitFailed : FitError {
    explicit FitFailed(const std::string& what) : FitError(what) {}
};
struct NoCrossingInBracket : DataError {
    explicit NoCrossingInBracket(const std::string& what) : DataError(what) {}
};
struct EmptyBand : DataError {
    explicit EmptyBand(const std::string& what) : DataError(what) {}
};
struct EmptyNode : DataError {
    explicit EmptyNode(const std::string& what) : DataError(what) {}
};

}  // namespace jobclass
