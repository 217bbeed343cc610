#pragma once

namespace stkrig {

/// Entry point of the `stkrig` command. Returns 0 on success, 2 on usage
/// errors and 1 on runtime failures; failures also print an error JSON.
int run_cli(int argc, char** argv);

}  // namespace stkrig
