"""Domain ports: the contracts the infrastructure layer satisfies.

Every protocol here is a PEP 544 structural type.  Adapters are never
imported here; they fulfil these contracts by duck-typing.
"""
