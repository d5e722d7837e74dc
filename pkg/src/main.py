"""
Probstruct 应用程序主入口点。
"""

import sys
from pathlib import Path
from typing import Optional


def setup_import_path() -> None:
    """
    设置正确的导入路径，确保模块能正常导入。
    """
    src_dir = Path(__file__).resolve().parent
    project_root = src_dir.parent
    if str(project_root) not in sys.path:
        sys.path.insert(0, str(project_root))


setup_import_path()

from src.cli import EXIT_INVALID_CONFIG, create_parser, run_cli
from src.core.interfaces import ISampler


def main(args: Optional[list[str]] = None, sampler: Optional[ISampler] = None) -> int:
    """
    应用程序主入口点。

    参数:
        args: 命令行参数。如果为 None，将使用 sys.argv[1:]。
        sampler: 采样器测试钩子

    返回:
        退出码（0、1、2 或 3）
    """
    parser = create_parser()
    try:
        parsed_args = parser.parse_args(args)
    except SystemExit as e:
        # --help / --version 以 0 退出，参数错误以 2 退出
        return EXIT_INVALID_CONFIG if e.code not in (0, None) else 0
    return run_cli(parsed_args, sampler)


if __name__ == "__main__":
    sys.exit(main())
