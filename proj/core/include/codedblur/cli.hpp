#pragma once

namespace codedblur::cli {

/// Entry point for the codedblur tool. Subcommands:
///   psf | trace | synth | estimate | reconstruct | optimize | eval | sweep-noise
/// Returns 0 on success, 1 on usage errors, 2 on data errors.
int run(int argc, const char* const* argv);

}  // namespace codedblur::cli
