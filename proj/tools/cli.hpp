#pragma once

namespace holab {

/// Exit status: 0 success, 1 usage error, 2 data or model error.
int run_cli(int argc, char** argv);

}  // namespace holab
