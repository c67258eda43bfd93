from app.commands.gen import router as gen_router
from app.commands.discover import router as discover_router
from app.commands.evaluate import router as eval_router
from app.commands.bench import router as bench_router


__all__ = ['gen_router',
           'discover_router',
           'eval_router',
           'bench_router']
