import re
from typing import FrozenSet, List, Optional


class RefParser:
    """Parse lattice, set and homomorphism-chain references from the command line."""
    
    
    LATTICE_ALIASES = {
        "2": ["2", "two", "chain2", "2-chain"],
        "3-chain": ["3-chain", "3chain", "chain3", "three"],
        "4-chain": ["4-chain", "4chain", "chain4", "four"],
        "M3": ["m3", "diamond"],
        "N5": ["n5", "pentagon"],
        "B2": ["b2", "2x2", "boolean2", "square"],
    }
    
    @classmethod
    def catalog_name(cls, text: str) -> Optional[str]:
        """
        Standard catalog name for a reference, or None for file paths.
        
        Examples:
        - "catalog:M3" -> "M3"
        - "pentagon" -> "N5"
        - "lattices/foo.json" -> None
        """
        match = re.fullmatch(r'\s*(?:catalog:)?\s*([A-Za-z0-9x\-]+)\s*', text)
        if not match:
            return None
        key = match.group(1).lower()
        for standard_name, variations in cls.LATTICE_ALIASES.items():
            if key in variations or key == standard_name.lower():
                return standard_name
        return None
    
    @classmethod
    def lattice_ref(cls, text: str) -> str:
        """Normalize to ``catalog:NAME`` when the text names a catalog lattice, else keep the path."""
        name = cls.catalog_name(text)
        if name is not None:
            return f"catalog:{name}"
        return text.strip()
    
    @classmethod
    def parse_set(cls, text: str) -> FrozenSet[int]:
        """
        Parse a set literal of naturals.
        
        Examples:
        - "0,1,3" -> {0, 1, 3}
        - "{0, 1}" -> {0, 1}
        - "" -> {}
        """
        body = text.strip()
        if body.startswith("{") and body.endswith("}"):
            body = body[1:-1]
        if not body.strip():
            return frozenset()
        if not re.fullmatch(r'\s*\d+(?:\s*,\s*\d+)*\s*,?\s*', body):
            raise ValueError(f"not a set of naturals: {text!r}")
        return frozenset(int(part) for part in re.findall(r'\d+', body))
    
    @classmethod
    def parse_chain(cls, text: str) -> List[str]:
        """
        Split a homomorphism chain into lattice references.
        
        Examples:
        - "2>3-chain>B2" -> ["catalog:2", "catalog:3-chain", "catalog:B2"]
        """
        parts = [part for part in re.split(r'\s*>\s*', text.strip()) if part]
        if len(parts) < 2:
            raise ValueError(f"a chain needs at least two lattices: {text!r}")
        return [cls.lattice_ref(part) for part in parts]
    
    @classmethod
    def format_set(cls, values) -> str:
        return "{" + ",".join(str(v) for v in sorted(values)) + "}"
