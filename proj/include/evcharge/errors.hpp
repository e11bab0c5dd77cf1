#pragma once

#include <stdexcept>
#include <string>

namespace evc {

// Bad key/value in a scenario config or on the command line.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// CSV ingestion failure; carries the 1-based data row that broke the parse.
struct ingest_error : std::runtime_error {
    ingest_error(const std::string& what, long row)
        : std::runtime_error(what + " (row " + std::to_string(row) + ")"), row(row) {}
    long row;
};

// Physically inconsistent model state (e.g. base load above the peak cap).
struct model_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Solver failure inside the slot loop; carries a state dump for triage.
struct engine_fault : std::runtime_error {
    engine_fault(const std::string& what, std::string dump)
        : std::runtime_error(what), state_dump(std::move(dump)) {}
    std::string state_dump;
};

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace evc
