#pragma once

namespace d2d::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kConfigError = 2,
  kIoError = 3,  // missing or unreadable checkpoint, unwritable output
  kCheckpointError = 4,  // bad magic, version, truncation or shape
  kDivergence = 5,
  kGradcheckFailed = 6,
  kSearchSpace = 7,
  kInternal = 10,
};

// Entry point for the d2dpower tool: train, eval, powermap, gradcheck, oracle.
int run(int argc, const char* const* argv);

}  // namespace d2d::cli
