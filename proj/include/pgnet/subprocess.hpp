#pragma once

#include <string>

namespace pgnet {

struct ExecResult {
  std::string out;
  std::string err;
  int status = 0;
};

// Runs `command` through /bin/sh -c with `input` on stdin, capturing stdout
// and stderr. Reads and writes are interleaved so neither side can stall on
// a full pipe.
ExecResult run_process(const std::string& command, const std::string& input);

}  // namespace pgnet
