import argparse
import glob
import os
import sys

from .errors import BridgeArgumentError, ModelLoadError, RequestFormatError
from .fulfill import fulfill_requests
from .models import TorchscriptModel, parse_mock


def _find_request_files(target: str) -> list[str]:
    if os.path.isfile(target):
        return [target]
    if os.path.isdir(target):
        found = sorted(glob.glob(os.path.join(target, "*", "requests.txt")))
        direct = os.path.join(target, "requests.txt")
        if os.path.isfile(direct):
            found.insert(0, direct)
        return found
    return []


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="saif-bridge",
        description="Fulfill box-request manifests with a segmentation model")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("fulfill", help="produce map files for request manifests")
    p.add_argument("--requests", required=True,
                   help="request file, or a directory scanned for */requests.txt")
    p.add_argument("--checkpoint", help="scripted checkpoint path")
    p.add_argument("--device", default="cpu", help="device for the checkpoint")
    p.add_argument("--mock", help="constant:<v> stand-in instead of a checkpoint")
    return parser


def _cmd_fulfill(args) -> int:
    if bool(args.checkpoint) == bool(args.mock):
        print("saif-bridge: error: give exactly one of --checkpoint / --mock",
              file=sys.stderr)
        return 2
    files = _find_request_files(args.requests)
    if not files:
        print(f"saif-bridge: error: no request files at {args.requests}",
              file=sys.stderr)
        return 3
    model = parse_mock(args.mock) if args.mock else \
        TorchscriptModel(args.checkpoint, args.device)
    total_failed = 0
    for path in files:
        summary = fulfill_requests(path, model)
        total_failed += len(summary.failed)
        tag = summary.image_id or path
        print(f"{tag}: calls={summary.calls} skipped={summary.skipped} "
              f"failed={len(summary.failed)}")
    print(f"fulfilled {len(files)} request file(s), {total_failed} failed line(s)")
    return 3 if total_failed else 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _cmd_fulfill(args)
    except (BridgeArgumentError, ModelLoadError) as exc:
        print(f"saif-bridge: error: {exc}", file=sys.stderr)
        return 2
    except RequestFormatError as exc:
        print(f"saif-bridge: error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"saif-bridge: i/o error: {exc}", file=sys.stderr)
        return 4


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
